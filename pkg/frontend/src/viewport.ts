import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { STLLoader } from "three/examples/jsm/loaders/STLLoader.js";
import { OBJLoader } from "three/examples/jsm/loaders/OBJLoader.js";
import { PLYLoader } from "three/examples/jsm/loaders/PLYLoader.js";

import { ApiClient } from "./api";
import { COLOR_DESIGN_SPACE, COLOR_FOAM_MINUS, COLOR_FOAM_PLUS } from "./colors";
import type { SessionStore, UiSessionState } from "./store";

/**
 * 3D window: the uploaded object plus the two translucent foam meshes
 * fetched from the service, an orbit camera, and the design-space wireframe.
 * The "move" offset translates the object along +x to preview taking it out
 * of the foams. All foam geometry comes from the server byte-for-byte; the
 * viewport never builds foam shapes itself.
 */
export class Viewport {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private objectGroup = new THREE.Group();
  private foamPlus: THREE.Mesh | null = null;
  private foamMinus: THREE.Mesh | null = null;
  private spaceFrame: THREE.LineSegments | null = null;
  private shownGenerationSeq = -1;
  private disposed = false;

  constructor(
    private canvas: HTMLCanvasElement,
    private api: ApiClient,
    private store: SessionStore,
    private onError: (msg: string) => void = () => {},
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setClearColor(0x1a1a20);
    this.camera = new THREE.PerspectiveCamera(45, 1, 1, 5000);
    this.camera.position.set(420, 260, 320);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableDamping = true;
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const key = new THREE.DirectionalLight(0xffffff, 1.1);
    key.position.set(1, 2, 1.5);
    this.scene.add(key);
    this.scene.add(this.objectGroup);
    store.subscribe((s) => this.onState(s));
    this.resize();
    this.animate();
  }

  resize(): void {
    const w = this.canvas.clientWidth || 800;
    const h = this.canvas.clientHeight || 520;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  private animate = (): void => {
    if (this.disposed) return;
    requestAnimationFrame(this.animate);
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  };

  /** Show the uploaded object from its original bytes (STL/PLY/OBJ). */
  setObjectFromFile(buffer: ArrayBuffer, filename: string, bboxCenter: THREE.Vector3): void {
    this.objectGroup.clear();
    const ext = filename.split(".").pop()?.toLowerCase();
    let geometry: THREE.BufferGeometry | null = null;
    try {
      if (ext === "stl") geometry = new STLLoader().parse(buffer);
      else if (ext === "ply") geometry = new PLYLoader().parse(buffer);
      else if (ext === "obj") {
        const text = new TextDecoder().decode(buffer);
        const group = new OBJLoader().parse(text);
        const first = group.children.find((c): c is THREE.Mesh => c instanceof THREE.Mesh);
        geometry = first ? (first.geometry as THREE.BufferGeometry) : null;
      }
    } catch {
      geometry = null;
    }
    if (!geometry) {
      this.onError("cannot display this mesh format in the 3D window");
      return;
    }
    geometry.computeVertexNormals();
    // the service centers the model at upload; mirror that here
    geometry.translate(-bboxCenter.x, -bboxCenter.y, -bboxCenter.z);
    const mesh = new THREE.Mesh(
      geometry,
      new THREE.MeshStandardMaterial({ color: 0xd8d8d8, roughness: 0.7 }),
    );
    this.objectGroup.add(mesh);
  }

  private onState(s: UiSessionState): void {
    this.objectGroup.visible = s.visibility.object;
    this.objectGroup.position.x = s.moveOffsetMm;
    if (this.foamPlus) this.foamPlus.visible = s.visibility.foamPlus;
    if (this.foamMinus) this.foamMinus.visible = s.visibility.foamMinus;
    this.updateSpaceFrame(s);
    if (s.generation && s.generationSeq !== this.shownGenerationSeq && s.sessionId) {
      this.shownGenerationSeq = s.generationSeq;
      void this.reloadFoams(s.sessionId, s.generationSeq);
    }
  }

  private updateSpaceFrame(s: UiSessionState): void {
    const [nx, ny, nz] = s.params.resolution;
    const [bx, by, bz] = s.params.block_size_mm;
    if (this.spaceFrame) this.scene.remove(this.spaceFrame);
    const box = new THREE.BoxGeometry(nx * bx, ny * by, nz * bz);
    this.spaceFrame = new THREE.LineSegments(
      new THREE.EdgesGeometry(box),
      new THREE.LineBasicMaterial({ color: COLOR_DESIGN_SPACE }),
    );
    this.spaceFrame.visible = s.visibility.designSpace;
    this.scene.add(this.spaceFrame);
  }

  private async reloadFoams(sessionId: string, seq: number): Promise<void> {
    try {
      const [plusBuf, minusBuf] = await Promise.all([
        this.api.fetchFoamMesh(sessionId, "plus"),
        this.api.fetchFoamMesh(sessionId, "minus"),
      ]);
      if (seq !== this.store.state.generationSeq) return; // stale fetch
      const loader = new STLLoader();
      for (const old of [this.foamPlus, this.foamMinus]) {
        if (old) {
          this.scene.remove(old);
          old.geometry.dispose();
        }
      }
      const material = (color: string) =>
        new THREE.MeshStandardMaterial({
          color,
          transparent: true,
          opacity: 0.55,
          side: THREE.DoubleSide,
        });
      this.foamPlus = new THREE.Mesh(loader.parse(plusBuf), material(COLOR_FOAM_PLUS));
      this.foamMinus = new THREE.Mesh(loader.parse(minusBuf), material(COLOR_FOAM_MINUS));
      this.foamPlus.visible = this.store.state.visibility.foamPlus;
      this.foamMinus.visible = this.store.state.visibility.foamMinus;
      this.scene.add(this.foamPlus);
      this.scene.add(this.foamMinus);
    } catch {
      this.onError("foam mesh fetch failed; the 3D window may be stale");
    }
  }

  dispose(): void {
    this.disposed = true;
    this.renderer.dispose();
  }
}
