// Pure derivation of the board rendering model from the last state message.
// No rules live here: highlights come verbatim from legal_actions, fog from
// the server's visibility mask.

import { ActionMsg, StateMsg, UnitView } from "./protocol.js";

export interface UnitBadge {
  unit_id: number;
  owner: number;
  type: string;
  health: number;
  healthRatio: number; // against the healthiest same-type unit in this message
  spent: string[];
}

export interface CellView {
  x: number;
  y: number;
  symbol: string;
  fogged: boolean;
  unit: UnitBadge | null;
  selected: boolean;
  highlight: string | null; // "Move" | "Attack" | "Heal" target of the selection
}

export interface BoardView {
  width: number;
  height: number;
  cells: CellView[];
  yourTurn: boolean;
  selectedUnit: number | null;
  selectionActions: ActionMsg[];
}

export function buildBoardView(state: StateMsg, selectedUnit: number | null): BoardView {
  const obs = state.observation;
  const byCell = new Map<string, UnitView>();
  const typeMax = new Map<string, number>();
  for (const unit of obs.units) {
    byCell.set(`${unit.position[0]},${unit.position[1]}`, unit);
    typeMax.set(unit.type, Math.max(typeMax.get(unit.type) ?? 1, unit.health));
  }

  const selectionActions =
    selectedUnit === null ? [] : state.legal_actions.filter((a) => a.unit_id === selectedUnit);
  const highlights = new Map<string, string>();
  for (const action of selectionActions) {
    if (action.target !== null) {
      highlights.set(`${action.target[0]},${action.target[1]}`, action.category);
    }
  }

  const cells: CellView[] = [];
  for (let y = 0; y < obs.height; y += 1) {
    for (let x = 0; x < obs.width; x += 1) {
      const key = `${x},${y}`;
      const unit = byCell.get(key) ?? null;
      cells.push({
        x,
        y,
        symbol: obs.rows[y][x],
        fogged: obs.fog_rows !== null && obs.fog_rows[y][x] === "0",
        unit:
          unit === null
            ? null
            : {
                unit_id: unit.unit_id,
                owner: unit.owner,
                type: unit.type,
                health: unit.health,
                healthRatio: unit.health / (typeMax.get(unit.type) ?? unit.health),
                spent: unit.spent,
              },
        selected: unit !== null && unit.unit_id === selectedUnit,
        highlight: highlights.get(key) ?? null,
      });
    }
  }
  return {
    width: obs.width,
    height: obs.height,
    cells,
    yourTurn: state.your_turn,
    selectedUnit,
    selectionActions,
  };
}
