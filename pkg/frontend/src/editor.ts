// Grid editor state with two-way DSL text synchronization.  The grid and the
// text view are projections of one model; server-side validation supplies
// the authoritative diagnostics.

import { parseDsl, serializeDsl, ClientDiagnostic } from "./dsl.js";
import {
  ExperimentModel,
  Placement,
  emptyModel,
  newPlacement,
  sortPlacements,
} from "./model.js";

export class EditorState {
  model: ExperimentModel = emptyModel();
  selected: Placement | null = null;

  placeComponent(kind: string, x: number, y: number): Placement | null {
    if (this.componentAt(x, y)) return null; // one component per cell
    const placement = newPlacement(kind, x, y);
    this.model.placements.push(placement);
    this.model.placements = sortPlacements(this.model.placements);
    this.selected = placement;
    return placement;
  }

  componentAt(x: number, y: number): Placement | undefined {
    return this.model.placements.find((p) => p.x === x && p.y === y);
  }

  moveComponent(placement: Placement, x: number, y: number): boolean {
    const occupant = this.componentAt(x, y);
    if (occupant && occupant !== placement) return false;
    placement.x = x;
    placement.y = y;
    this.model.placements = sortPlacements(this.model.placements);
    return true;
  }

  removeComponent(placement: Placement): void {
    this.model.placements = this.model.placements.filter((p) => p !== placement);
    if (this.selected === placement) this.selected = null;
  }

  rotateSelected(): void {
    if (this.selected) {
      this.selected.orientation = (this.selected.orientation + 90) % 360;
    }
  }

  setParam(placement: Placement, key: string, value: number | string): void {
    placement.params[key] = value;
  }

  toDsl(): string {
    return serializeDsl(this.model);
  }

  loadDsl(text: string): ClientDiagnostic[] {
    const { model, diagnostics } = parseDsl(text);
    if (diagnostics.length === 0) {
      this.model = model;
      this.selected = null;
    }
    return diagnostics;
  }
}
