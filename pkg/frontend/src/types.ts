// Server payload shapes (v1). The UI renders exclusively from these; no
// game logic is ever computed client-side.

export interface TopologyMeta {
  kind: "square" | "rectangle" | "hexagon" | "hex_rectangle";
  rows: number;
  cols: number;
  num_cells: number;
  row_lengths: number[];
  row_of: number[];
  col_of: number[];
}

export interface GameMeta {
  name: string;
  pieces: string[];
  action_space: number;
  codec: "placement" | "movement" | "gridworld";
  topology: TopologyMeta;
  rendering: {
    colors: Record<string, string>;
    shapes: Record<string, string>;
  };
}

export interface LegalMove {
  action: number;
  kind: "place" | "move" | "pass" | "direction";
  source?: number | null;
  dest?: number | null;
  direction?: string;
}

export interface CellView {
  piece: string;
  owner: "P1" | "P2";
}

export interface Outcome {
  p1: "win" | "lose" | "draw";
  p2: "win" | "lose" | "draw";
  truncated: boolean;
}

export interface LastAction {
  mover: "P1" | "P2";
  kind: string;
  source: number;
  dest: number;
}

export interface StateView {
  move_count: number;
  mover: "P1" | "P2";
  phase: number;
  terminated: boolean;
  outcome: Outcome | null;
  scores: number[] | null;
  passes: number;
  cells: (CellView | null)[];
  last_action: LastAction | null;
  legal_moves: LegalMove[];
}

export interface SessionView {
  v: number;
  session_id: string;
  game: GameMeta;
  seats: { p1: string; p2: string };
  history_length: number;
  state: StateView;
}
