/** Orbit camera math and the camera-anchored cutaway lens.
 *
 * The lens mirrors the camera pose (apex at the eye, forward = view
 * direction, server convention: forward is the local -z of the
 * orientation quaternion). "Lock lens" freezes the lens parameters so the
 * cut stays put while the camera keeps orbiting.
 */

import type { LensParams } from './types.js';

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];   // [w, x, y, z]

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) throw new Error('cannot normalize zero vector');
  return [a[0] / n, a[1] / n, a[2] / n];
}

export function rotateVector(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  const u: Vec3 = [x, y, z];
  const uv = cross(u, v);
  const uuv = cross(u, uv);
  return [
    v[0] + 2 * (w * uv[0] + uuv[0]),
    v[1] + 2 * (w * uv[1] + uuv[1]),
    v[2] + 2 * (w * uv[2] + uuv[2]),
  ];
}

/** Quaternion of the rotation matrix with columns (right, up, -forward),
 * i.e. a camera frame whose local -z looks along `forward`. */
export function lookOrientation(forward: Vec3, upHint: Vec3 = [0, 0, 1]): Quat {
  const f = normalize(forward);
  let r = cross(f, upHint);
  if (norm(r) < 1e-9) {
    r = cross(f, [0, 1, 0]);   // forward parallel to up: fall back
  }
  r = normalize(r);
  const u = cross(r, f);
  // column-major rotation matrix [r u -f]
  const m00 = r[0], m01 = u[0], m02 = -f[0];
  const m10 = r[1], m11 = u[1], m12 = -f[1];
  const m20 = r[2], m21 = u[2], m22 = -f[2];
  const trace = m00 + m11 + m22;
  let w: number, x: number, y: number, z: number;
  if (trace > 0) {
    const s = Math.sqrt(trace + 1) * 2;
    w = s / 4; x = (m21 - m12) / s; y = (m02 - m20) / s; z = (m10 - m01) / s;
  } else if (m00 > m11 && m00 > m22) {
    const s = Math.sqrt(1 + m00 - m11 - m22) * 2;
    w = (m21 - m12) / s; x = s / 4; y = (m01 + m10) / s; z = (m02 + m20) / s;
  } else if (m11 > m22) {
    const s = Math.sqrt(1 + m11 - m00 - m22) * 2;
    w = (m02 - m20) / s; x = (m01 + m10) / s; y = s / 4; z = (m12 + m21) / s;
  } else {
    const s = Math.sqrt(1 + m22 - m00 - m11) * 2;
    w = (m10 - m01) / s; x = (m02 + m20) / s; y = (m12 + m21) / s; z = s / 4;
  }
  const n = Math.hypot(w, x, y, z);
  return [w / n, x / n, y / n, z / n];
}

export interface CameraPose {
  position: Vec3;
  target: Vec3;
  up: Vec3;
}

/** Spherical orbit around a target; z-up world like the grid. */
export class OrbitCamera {
  constructor(
    public target: Vec3 = [0, 0, 0],
    public radius = 100,
    public theta = Math.PI / 4,     // azimuth in the xy plane
    public phi = Math.PI / 3,       // polar angle from +z
  ) {}

  orbit(dTheta: number, dPhi: number): void {
    this.theta += dTheta;
    this.phi = Math.min(Math.max(this.phi + dPhi, 0.05), Math.PI - 0.05);
  }

  zoom(factor: number): void {
    this.radius = Math.max(this.radius * factor, 1e-3);
  }

  pan(dx: number, dy: number): void {
    const pose = this.pose();
    const f = normalize(sub(this.target, pose.position));
    const r = normalize(cross(f, [0, 0, 1]));
    const u = cross(r, f);
    this.target = [
      this.target[0] + r[0] * dx + u[0] * dy,
      this.target[1] + r[1] * dx + u[1] * dy,
      this.target[2] + r[2] * dx + u[2] * dy,
    ];
  }

  position(): Vec3 {
    const sinPhi = Math.sin(this.phi);
    return [
      this.target[0] + this.radius * sinPhi * Math.cos(this.theta),
      this.target[1] + this.radius * sinPhi * Math.sin(this.theta),
      this.target[2] + this.radius * Math.cos(this.phi),
    ];
  }

  pose(): CameraPose {
    return { position: this.position(), target: this.target, up: [0, 0, 1] };
  }
}

export interface LensSettings {
  near: number;
  far: number;
  halfAngleH: number;
  halfAngleV: number;
}

export const DEFAULT_LENS: LensSettings = {
  near: 5, far: 400, halfAngleH: 0.25, halfAngleV: 0.2,
};

export function lensFromPose(pose: CameraPose,
                             settings: LensSettings): LensParams {
  const forward = sub(pose.target, pose.position);
  return {
    apex: [...pose.position],
    orientation: [...lookOrientation(forward, pose.up)],
    near: settings.near,
    far: settings.far,
    half_angle_h: settings.halfAngleH,
    half_angle_v: settings.halfAngleV,
  };
}

/** Camera-anchored lens with an explicit lock.
 *
 * Unlocked, the lens follows every camera move; locked, it keeps the pose
 * captured at lock time no matter how the camera orbits.
 */
export class LensController {
  locked = false;
  private frozen: LensParams | null = null;

  paramsFor(pose: CameraPose, settings: LensSettings): LensParams {
    if (this.locked && this.frozen) {
      return this.frozen;
    }
    return lensFromPose(pose, settings);
  }

  lock(pose: CameraPose, settings: LensSettings): LensParams {
    this.frozen = lensFromPose(pose, settings);
    this.locked = true;
    return this.frozen;
  }

  unlock(): void {
    this.locked = false;
    this.frozen = null;
  }
}
