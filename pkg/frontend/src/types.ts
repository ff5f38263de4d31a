// Shapes of the seat-scoped JSON the session service serves. The client
// renders these verbatim; it never recomputes game outcomes.

export interface Phase {
  kind: "waiting" | "collecting" | "feedback" | "finished";
  part: number;
  round: number;
}

export interface Box {
  red: number;
  brown: number;
  green: number;
}

export interface MenuEntry {
  action: string;
  cost: number;
  own_red_conversion: number;
}

export interface MemberView {
  position: string;
  action: string;
  loss_probability: number;
}

export interface RoundFeedback {
  part: number;
  round: number;
  members: MemberView[];
}

export interface HistoryRow {
  part: number;
  round: number;
  action: string;
  loss_probability: number;
  draw: string;
  payoff: number;
  paid_round: boolean;
}

export interface FinalView {
  paid_rounds: Record<string, number>;
  paid_payoffs: { part: number; round: number; payoff: number }[];
  total_payoff: number;
}

export interface SeatState {
  session_id: string;
  phase: Phase;
  position: string;
  degree: number;
  history: HistoryRow[];
  waiting_for?: string[];
  treatment?: string;
  box?: Box;
  loss_probability?: number;
  menu?: MenuEntry[];
  submitted?: boolean;
  acknowledged?: boolean;
  previous_round?: RoundFeedback | null;
  feedback?: RoundFeedback;
  final?: FinalView;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;
