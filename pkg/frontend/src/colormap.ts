/** Color ramps for the variance model and the variance-delta overlay. */

export type Rgb = [number, number, number];

const VARIANCE_STOPS: Rgb[] = [
  [0.267, 0.005, 0.329],   // deep violet
  [0.282, 0.363, 0.553],
  [0.128, 0.567, 0.551],
  [0.369, 0.789, 0.383],
  [0.993, 0.906, 0.144],   // yellow
];

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function clamp01(t: number): number {
  return Math.min(Math.max(t, 0), 1);
}

/** Sequential map for variance in [0, 1]. */
export function varianceColor(t: number): Rgb {
  const x = clamp01(t) * (VARIANCE_STOPS.length - 1);
  const i = Math.min(Math.floor(x), VARIANCE_STOPS.length - 2);
  const f = x - i;
  const a = VARIANCE_STOPS[i];
  const b = VARIANCE_STOPS[i + 1];
  return [lerp(a[0], b[0], f), lerp(a[1], b[1], f), lerp(a[2], b[2], f)];
}

/** Diverging map for signed deltas, symmetric around 0: blue -> white ->
 * red, scaled by the largest magnitude present. */
export function deltaColor(value: number, maxAbs: number): Rgb {
  if (maxAbs <= 0) {
    return [1, 1, 1];
  }
  const t = Math.min(Math.max(value / maxAbs, -1), 1);
  if (t < 0) {
    return [lerp(1, 0.231, -t), lerp(1, 0.424, -t), lerp(1, 0.780, -t)];
  }
  return [lerp(1, 0.796, t), lerp(1, 0.145, t), lerp(1, 0.161, t)];
}

export const CLUSTER_PALETTE: Rgb[] = [
  [0.894, 0.102, 0.110],
  [0.216, 0.494, 0.722],
  [0.302, 0.686, 0.290],
  [0.596, 0.306, 0.639],
  [1.000, 0.498, 0.000],
  [0.651, 0.337, 0.157],
  [0.969, 0.506, 0.749],
  [0.400, 0.400, 0.400],
];

export function clusterColor(cluster: number): Rgb {
  return CLUSTER_PALETTE[((cluster % CLUSTER_PALETTE.length)
    + CLUSTER_PALETTE.length) % CLUSTER_PALETTE.length];
}
