// Pure DOM rendering of one seat's view. Everything shown comes straight
// from the server state; the only arithmetic is display formatting.

import { Box, MenuEntry, SeatState } from "./types.js";

export interface Handlers {
  onChoose(action: string): void;
  onContinue(): void;
}

export function riskPercent(box: Box): string {
  // loss chance is the red+brown share of the 100-ball box
  return `${box.red + box.brown}%`;
}

function el(doc: Document, tag: string, className: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function actionLabel(entry: MenuEntry): string {
  if (entry.action === "no_buy") return "No token";
  const name = entry.action === "token_x" ? "Token X" : "Token Y";
  return `${name} (${entry.cost} ECU)`;
}

function actionDetail(entry: MenuEntry): string {
  if (entry.action === "no_buy") return "keep your box as it is";
  return `${entry.own_red_conversion} red → green`;
}

function renderBox(doc: Document, state: SeatState): HTMLElement {
  const box = state.box!;
  const panel = el(doc, "section", "box-panel");
  panel.appendChild(el(doc, "h3", "", `Your box (position ${state.position})`));
  const counts = el(doc, "ul", "box-counts");
  for (const [colour, count] of [["red", box.red], ["brown", box.brown],
                                 ["green", box.green]] as const) {
    const item = el(doc, "li", `balls-${colour}`, `${count} ${colour} balls`);
    counts.appendChild(item);
  }
  panel.appendChild(counts);
  const risk = el(doc, "p", "risk", `Chance of losing 100 ECU: ${riskPercent(box)}`);
  risk.dataset.risk = riskPercent(box);
  panel.appendChild(risk);
  return panel;
}

function renderMembers(doc: Document, state: SeatState, heading: string,
                       feedback: { members: { position: string; action: string; loss_probability: number }[] }): HTMLElement {
  const panel = el(doc, "section", "feedback-panel");
  panel.appendChild(el(doc, "h3", "", heading));
  const table = doc.createElement("table");
  table.className = "members";
  for (const member of feedback.members) {
    const row = doc.createElement("tr");
    row.className = member.position === state.position ? "member self" : "member";
    row.appendChild(el(doc, "td", "pos", member.position));
    row.appendChild(el(doc, "td", "action", member.action.replace("_", " ")));
    row.appendChild(el(doc, "td", "risk",
                       `${Math.round(member.loss_probability * 100)}%`));
    table.appendChild(row);
  }
  panel.appendChild(table);
  return panel;
}

function renderCollecting(doc: Document, state: SeatState, handlers: Handlers,
                          busy: boolean): HTMLElement {
  const root = el(doc, "div", "screen collecting");
  root.appendChild(el(doc, "h2", "",
                      `Part ${state.phase.part}, round ${state.phase.round} of 10`));
  root.appendChild(renderBox(doc, state));
  const choices = el(doc, "section", "choices");
  choices.appendChild(el(doc, "h3", "", "Choose one option"));
  for (const entry of state.menu ?? []) {
    const button = doc.createElement("button");
    button.className = "choice";
    button.dataset.action = entry.action;
    button.textContent = `${actionLabel(entry)} — ${actionDetail(entry)}`;
    button.disabled = busy || Boolean(state.submitted);
    button.addEventListener("click", () => handlers.onChoose(entry.action));
    choices.appendChild(button);
  }
  root.appendChild(choices);
  if (state.submitted) {
    root.appendChild(el(doc, "p", "status", "Choice sent. Waiting for the group…"));
  }
  if (state.previous_round) {
    root.appendChild(renderMembers(doc, state, "Last round", state.previous_round));
  }
  return root;
}

function renderFeedback(doc: Document, state: SeatState, handlers: Handlers,
                        busy: boolean): HTMLElement {
  const root = el(doc, "div", "screen feedback");
  root.appendChild(el(doc, "h2", "",
                      `Part ${state.phase.part}, round ${state.phase.round}: results`));
  root.appendChild(renderMembers(doc, state, "Decisions and risk levels",
                                 state.feedback!));
  const cont = doc.createElement("button");
  cont.className = "continue";
  cont.dataset.action = "continue";
  cont.textContent = "Continue";
  cont.disabled = busy || Boolean(state.acknowledged);
  cont.addEventListener("click", () => handlers.onContinue());
  root.appendChild(cont);
  return root;
}

function renderFinished(doc: Document, state: SeatState): HTMLElement {
  const root = el(doc, "div", "screen finished");
  root.appendChild(el(doc, "h2", "", "Session finished"));
  const final = state.final!;
  for (const paid of final.paid_payoffs) {
    root.appendChild(el(doc, "p", "paid",
                        `Part ${paid.part}: round ${paid.round} was drawn for payment `
                        + `— ${paid.payoff} ECU`));
  }
  root.appendChild(el(doc, "p", "total", `Total: ${final.total_payoff} ECU`));
  return root;
}

export function render(root: HTMLElement, state: SeatState | null,
                       handlers: Handlers, options: { busy: boolean; error: string | null }): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  if (options.error) {
    const banner = el(doc, "div", "banner error",
                      `Connection problem: ${options.error}. Retrying…`);
    banner.dataset.role = "retry-banner";
    root.appendChild(banner);
  }
  if (state === null) {
    root.appendChild(el(doc, "p", "status", "Connecting…"));
    return;
  }
  switch (state.phase.kind) {
    case "waiting":
      root.appendChild(el(doc, "div", "screen waiting",
                          "Waiting for all participants to join…"));
      break;
    case "collecting":
      root.appendChild(renderCollecting(doc, state, handlers, options.busy));
      break;
    case "feedback":
      root.appendChild(renderFeedback(doc, state, handlers, options.busy));
      break;
    case "finished":
      root.appendChild(renderFinished(doc, state));
      break;
  }
}
