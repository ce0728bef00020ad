import * as THREE from "three";

import type { Quat, StrokeSample, Vec3 } from "./protocol";

const LOCAL_FORWARD = new THREE.Vector3(0, 0, 1);

function vec3(v: THREE.Vector3): Vec3 {
  return [v.x, v.y, v.z];
}

function quatWxyz(q: THREE.Quaternion): Quat {
  return [q.w, q.x, q.y, q.z];
}

// orientation whose local +z (the nozzle axis) points along dir
function facing(dir: THREE.Vector3): Quat {
  const q = new THREE.Quaternion().setFromUnitVectors(
    LOCAL_FORWARD,
    dir.clone().normalize(),
  );
  return quatWxyz(q);
}

/**
 * Turns pointer positions into stroke samples.
 *
 * A 2D pointer has no depth, so each stroke draws on a camera-parallel
 * plane frozen at stroke start: through the surface point under the
 * cursor, pulled toward the camera by the draw depth (the emulated
 * hand-to-surface distance). The head is the camera; the controller
 * orientation faces along the pointer ray, which is why the spray and
 * occlusion methods coincide in this client.
 */
export class PointerSampler {
  drawDepth: number;

  private readonly camera: THREE.PerspectiveCamera;
  private readonly ray = new THREE.Raycaster();
  private readonly plane = new THREE.Plane();
  private lastT = -Infinity;

  constructor(camera: THREE.PerspectiveCamera, drawDepth = 0) {
    if (drawDepth < 0) throw new Error("draw depth must be >= 0");
    this.camera = camera;
    this.drawDepth = drawDepth;
  }

  /** Freeze the drawing plane under the pointer; ndc in [-1, 1]^2. */
  begin(ndc: { x: number; y: number }, target?: THREE.Object3D): void {
    this.camera.updateMatrixWorld();
    const forward = this.camera
      .getWorldDirection(new THREE.Vector3())
      .normalize();
    this.ray.setFromCamera(new THREE.Vector2(ndc.x, ndc.y), this.camera);

    let anchor: THREE.Vector3 | null = null;
    if (target) {
      const hits = this.ray.intersectObject(target, true);
      if (hits.length > 0) anchor = hits[0].point;
    }
    if (!anchor) {
      // off the mesh: keep the old plane through the world origin
      anchor = new THREE.Vector3(0, 0, 0);
    }
    anchor.addScaledVector(forward, -this.drawDepth);
    this.plane.setFromNormalAndCoplanarPoint(forward, anchor);
  }

  /** One sample on the frozen plane; timestamps are forced monotone. */
  sample(ndc: { x: number; y: number }, tMs: number): StrokeSample {
    this.ray.setFromCamera(new THREE.Vector2(ndc.x, ndc.y), this.camera);
    const c = new THREE.Vector3();
    if (!this.ray.ray.intersectPlane(this.plane, c)) {
      // grazing ray: fall back to the plane's foot of the camera
      this.plane.projectPoint(this.camera.position, c);
    }
    if (tMs <= this.lastT) tMs = this.lastT + 1;
    this.lastT = tMs;

    const forward = this.camera
      .getWorldDirection(new THREE.Vector3())
      .normalize();
    return {
      c: vec3(c),
      cq: facing(this.ray.ray.direction),
      h: vec3(this.camera.position),
      hq: facing(forward),
      t_ms: tMs,
    };
  }
}
