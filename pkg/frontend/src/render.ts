/** Three.js view: hexahedral cells colored by a scalar field, cutaway
 * geometry with flat-shaded caps, VOI highlighting, and the cluster-graph
 * scatter. */

import * as THREE from 'three';

import type { CameraPose } from './camera.js';
import { clusterColor, deltaColor, varianceColor } from './colormap.js';
import type {
  ClusterGraph, CutResult, GridGeometry, VarianceField,
} from './types.js';

// Surface triangles of a cell in the server's corner order (top face
// (0,0),(1,0),(0,1),(1,1) then bottom), diagonals via corners 0 and 7.
const CELL_TRIANGLES: [number, number, number][] = [
  [0, 3, 1], [0, 2, 3], [4, 6, 7], [4, 7, 5],
  [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
  [0, 2, 6], [0, 6, 4], [1, 5, 7], [1, 7, 3],
];

const VOI_TINT = new THREE.Color(1.0, 0.42, 0.0);

export interface PickResult {
  kind: 'cell' | 'node';
  id: number;
}

export class GridView {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer | null = null;
  private raycaster = new THREE.Raycaster();

  private geometry: GridGeometry | null = null;
  private field = new Map<number, number>();
  private fieldMax = 1;
  private colorMode: 'variance' | 'delta' = 'variance';
  private voi = new Set<number>();
  private cut: CutResult | null = null;

  private cellGroup = new THREE.Group();
  private capGroup = new THREE.Group();
  private graphGroup = new THREE.Group();
  private cellMeshes = new Map<number, THREE.Mesh>();
  private nodeMeshes = new Map<number, THREE.Mesh>();

  constructor(canvas?: HTMLCanvasElement) {
    this.camera = new THREE.PerspectiveCamera(50, 1.6, 0.1, 5000);
    this.camera.up.set(0, 0, 1);
    this.scene.background = new THREE.Color(0x10141a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const sun = new THREE.DirectionalLight(0xffffff, 1.1);
    sun.position.set(1, 2, 3);
    this.scene.add(sun);
    this.scene.add(this.cellGroup, this.capGroup, this.graphGroup);
    if (canvas) {
      this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    }
  }

  resize(width: number, height: number): void {
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
    this.renderer?.setSize(width, height, false);
  }

  setGeometry(geometry: GridGeometry): void {
    this.geometry = geometry;
    this.rebuildCells();
  }

  setField(field: VarianceField | null,
           mode: 'variance' | 'delta' = 'variance'): void {
    this.field.clear();
    this.colorMode = mode;
    this.fieldMax = 1;
    if (field) {
      let maxAbs = 0;
      field.cells.forEach((cell, i) => {
        this.field.set(cell, field.values[i]);
        maxAbs = Math.max(maxAbs, Math.abs(field.values[i]));
      });
      this.fieldMax = maxAbs > 0 ? maxAbs : 1;
    }
    this.recolor();
  }

  setDelta(cells: number[], delta: number[]): void {
    this.setField({ cells, values: delta, realizations: [], properties: [] },
      'delta');
  }

  setVoi(cells: number[]): void {
    this.voi = new Set(cells);
    this.recolor();
  }

  setCut(cut: CutResult | null): void {
    this.cut = cut;
    this.rebuildCells();
  }

  private cellColor(id: number): THREE.Color {
    const value = this.field.get(id);
    let rgb: [number, number, number];
    if (value === undefined) {
      rgb = [0.35, 0.37, 0.42];
    } else if (this.colorMode === 'delta') {
      rgb = deltaColor(value, this.fieldMax);
    } else {
      rgb = varianceColor(value);
    }
    const color = new THREE.Color(rgb[0], rgb[1], rgb[2]);
    if (this.voi.has(id)) {
      color.lerp(VOI_TINT, 0.45);
    }
    return color;
  }

  private recolor(): void {
    for (const [id, mesh] of this.cellMeshes) {
      const material = mesh.material as THREE.MeshLambertMaterial;
      material.color = this.cellColor(id);
    }
  }

  private disposeGroup(group: THREE.Group): void {
    for (const child of [...group.children]) {
      group.remove(child);
      const mesh = child as THREE.Mesh;
      mesh.geometry?.dispose();
      (mesh.material as THREE.Material | undefined)?.dispose?.();
    }
  }

  private rebuildCells(): void {
    this.disposeGroup(this.cellGroup);
    this.disposeGroup(this.capGroup);
    this.cellMeshes.clear();
    if (!this.geometry) {
      return;
    }
    for (const cell of this.geometry.cells) {
      const entry = this.cut?.cells[String(cell.id)];
      if (entry?.status === 'culled') {
        continue;                      // hidden by the lens
      }
      if (entry?.status === 'clipped' && entry.faces) {
        this.addClippedCell(cell.id, entry.faces);
        continue;
      }
      const positions: number[] = [];
      for (const tri of CELL_TRIANGLES) {
        for (const corner of tri) {
          positions.push(...cell.corners[corner]);
        }
      }
      this.addCellMesh(cell.id, positions);
    }
  }

  private addCellMesh(id: number, positions: number[]): void {
    const geo = new THREE.BufferGeometry();
    geo.setAttribute('position',
      new THREE.Float32BufferAttribute(positions, 3));
    geo.computeVertexNormals();
    const material = new THREE.MeshLambertMaterial({
      color: this.cellColor(id), side: THREE.DoubleSide,
    });
    const mesh = new THREE.Mesh(geo, material);
    mesh.userData = { kind: 'cell', id };
    this.cellGroup.add(mesh);
    this.cellMeshes.set(id, mesh);
  }

  private addClippedCell(id: number,
                         faces: { vertices: number[][]; cap: boolean;
                                  normal: number[] | null }[]): void {
    const positions: number[] = [];
    for (const face of faces.filter((f) => !f.cap)) {
      for (let t = 1; t + 1 < face.vertices.length; t++) {
        positions.push(...face.vertices[0], ...face.vertices[t],
                       ...face.vertices[t + 1]);
      }
    }
    if (positions.length > 0) {
      this.addCellMesh(id, positions);
    }
    // caps: flat shading with the server-supplied cut-surface normal
    for (const face of faces.filter((f) => f.cap)) {
      const capPositions: number[] = [];
      const capNormals: number[] = [];
      const n = face.normal ?? [0, 0, 1];
      for (let t = 1; t + 1 < face.vertices.length; t++) {
        capPositions.push(...face.vertices[0], ...face.vertices[t],
                          ...face.vertices[t + 1]);
        for (let v = 0; v < 3; v++) {
          capNormals.push(n[0], n[1], n[2]);
        }
      }
      if (capPositions.length === 0) {
        continue;
      }
      const geo = new THREE.BufferGeometry();
      geo.setAttribute('position',
        new THREE.Float32BufferAttribute(capPositions, 3));
      geo.setAttribute('normal',
        new THREE.Float32BufferAttribute(capNormals, 3));
      const material = new THREE.MeshLambertMaterial({
        color: this.cellColor(id).clone().multiplyScalar(0.8),
        side: THREE.DoubleSide,
      });
      const mesh = new THREE.Mesh(geo, material);
      mesh.userData = { kind: 'cap', id };
      this.capGroup.add(mesh);
    }
  }

  // --- cluster graph -----------------------------------------------------------

  showGraph(graph: ClusterGraph | null, members: number[] = [],
            origin: [number, number, number] = [0, 0, 0],
            scale = 20): void {
    this.disposeGroup(this.graphGroup);
    this.nodeMeshes.clear();
    if (!graph) {
      return;
    }
    const maxScore = Math.max(...graph.nodes.map((n) => n.score), 1e-9);
    for (const node of graph.nodes) {
      const radius = 0.5 + 1.5 * (node.score / maxScore);
      const geo = node.is_center
        ? new THREE.OctahedronGeometry(radius * 1.6)
        : new THREE.SphereGeometry(radius, 12, 8);
      const rgb = clusterColor(node.cluster);
      const material = new THREE.MeshLambertMaterial({
        color: new THREE.Color(rgb[0], rgb[1], rgb[2]),
        emissive: members.includes(node.id) ? 0x333333 : 0x000000,
      });
      const mesh = new THREE.Mesh(geo, material);
      mesh.position.set(origin[0] + node.xyz[0] * scale,
                        origin[1] + node.xyz[1] * scale,
                        origin[2] + node.xyz[2] * scale);
      mesh.userData = { kind: 'node', id: node.id };
      this.graphGroup.add(mesh);
      this.nodeMeshes.set(node.id, mesh);
    }
  }

  // --- interaction --------------------------------------------------------------

  applyPose(pose: CameraPose): void {
    this.camera.position.set(...pose.position);
    this.camera.lookAt(...pose.target);
  }

  /** Pointer ray intersected with the horizontal plane z = height. */
  intersectHorizontal(ndcX: number, ndcY: number,
                      height: number): [number, number, number] | null {
    this.raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), this.camera);
    const plane = new THREE.Plane(new THREE.Vector3(0, 0, 1), -height);
    const point = new THREE.Vector3();
    if (this.raycaster.ray.intersectPlane(plane, point) === null) {
      return null;
    }
    return [point.x, point.y, point.z];
  }

  pick(ndcX: number, ndcY: number): PickResult | null {
    this.raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), this.camera);
    const hits = this.raycaster.intersectObjects(
      [...this.graphGroup.children, ...this.cellGroup.children], false);
    for (const hit of hits) {
      const data = hit.object.userData as { kind?: string; id?: number };
      if (data.kind === 'node' || data.kind === 'cell') {
        return { kind: data.kind, id: data.id! };
      }
    }
    return null;
  }

  render(): void {
    this.renderer?.render(this.scene, this.camera);
  }
}
