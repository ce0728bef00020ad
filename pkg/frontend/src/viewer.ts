import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import type { MeshDoc, Vec3 } from "./protocol";

/** Scene, camera and the curve overlay; no drawing logic lives here. */
export class Viewer {
  readonly camera: THREE.PerspectiveCamera;
  readonly controls: OrbitControls;
  surface: THREE.Mesh | null = null;

  private readonly scene = new THREE.Scene();
  private readonly renderer: THREE.WebGLRenderer;
  private readonly curves = new THREE.Group();
  private readonly canvas: HTMLCanvasElement;
  // one stroke = several line runs, split at skip gaps
  private strokeGroups: THREE.Group[] = [];
  private liveRun: THREE.Vector3[] = [];
  private liveLine: THREE.Line | null = null;
  private liveColor = new THREE.Color("#ffffff");

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene.background = new THREE.Color("#16181d");

    this.camera = new THREE.PerspectiveCamera(50, 1, 0.01, 50);
    this.camera.position.set(0, -1.2, 1.4);
    this.camera.lookAt(0, 0, 0);

    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.mouseButtons = {
      LEFT: null as unknown as THREE.MOUSE,
      MIDDLE: THREE.MOUSE.DOLLY,
      RIGHT: THREE.MOUSE.ROTATE,
    };

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const key = new THREE.DirectionalLight(0xffffff, 1.4);
    key.position.set(2, -2, 3);
    this.scene.add(key);
    const fill = new THREE.DirectionalLight(0x8899ff, 0.5);
    fill.position.set(-2, 1, -1);
    this.scene.add(fill);
    this.scene.add(this.curves);

    this.resize();
    window.addEventListener("resize", () => this.resize());
    this.renderer.setAnimationLoop(() => {
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    });
  }

  setMesh(doc: MeshDoc): void {
    if (this.surface) {
      this.scene.remove(this.surface);
      this.surface.geometry.dispose();
    }
    this.clearCurves();
    const geo = new THREE.BufferGeometry();
    geo.setAttribute(
      "position",
      new THREE.Float32BufferAttribute(doc.vertices.flat(), 3),
    );
    geo.setAttribute(
      "normal",
      new THREE.Float32BufferAttribute(doc.normals.flat(), 3),
    );
    geo.setIndex(doc.faces.flat());
    const mat = new THREE.MeshStandardMaterial({
      color: "#b9c0cc",
      metalness: 0.05,
      roughness: 0.75,
      side: THREE.DoubleSide,
    });
    this.surface = new THREE.Mesh(geo, mat);
    this.scene.add(this.surface);

    const [lo, hi] = doc.bbox;
    const centre = new THREE.Vector3(
      (lo[0] + hi[0]) / 2,
      (lo[1] + hi[1]) / 2,
      (lo[2] + hi[2]) / 2,
    );
    const diag = new THREE.Vector3(...hi).distanceTo(new THREE.Vector3(...lo));
    this.controls.target.copy(centre);
    this.camera.position
      .copy(centre)
      .add(new THREE.Vector3(0, -0.9, 0.7).multiplyScalar(diag || 1));
    this.camera.lookAt(centre);
  }

  /** ndc coordinates of a client pixel position. */
  toNdc(x: number, y: number): { x: number; y: number } {
    const r = this.canvas.getBoundingClientRect();
    return {
      x: ((x - r.left) / r.width) * 2 - 1,
      y: -(((y - r.top) / r.height) * 2 - 1),
    };
  }

  beginStroke(color: string): void {
    this.liveColor = new THREE.Color(color);
    const group = new THREE.Group();
    this.strokeGroups.push(group);
    this.curves.add(group);
    this.liveRun = [];
    this.liveLine = null;
  }

  inkPoint(p: Vec3): void {
    this.liveRun.push(new THREE.Vector3(...p));
    if (!this.liveLine) {
      const geo = new THREE.BufferGeometry();
      this.liveLine = new THREE.Line(
        geo,
        new THREE.LineBasicMaterial({ color: this.liveColor, linewidth: 2 }),
      );
      const group = this.strokeGroups[this.strokeGroups.length - 1];
      group.add(this.liveLine);
    }
    this.liveLine.geometry.setFromPoints(this.liveRun);
  }

  /** A skipped sample: break the line, leave a gap. */
  inkGap(): void {
    this.liveRun = [];
    this.liveLine = null;
  }

  endStroke(): void {
    this.liveRun = [];
    this.liveLine = null;
  }

  removeLastStroke(): void {
    const group = this.strokeGroups.pop();
    if (group) this.curves.remove(group);
  }

  clearCurves(): void {
    for (const g of this.strokeGroups) this.curves.remove(g);
    this.strokeGroups = [];
    this.liveRun = [];
    this.liveLine = null;
  }

  private resize(): void {
    const w = this.canvas.clientWidth || window.innerWidth;
    const h = this.canvas.clientHeight || window.innerHeight;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }
}
