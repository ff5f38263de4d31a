// End-to-end: a scripted browser session against the real session service.
// Spawns the Python server, creates a live session with one human seat, and
// drives both 10-round parts purely through rendered UI controls; the
// server's log must equal the clicked sequence exactly.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { SessionApi } from "../src/api.js";
import { SeatController } from "../src/app.js";
import { SeatState } from "../src/types.js";

const PORT = 8731 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

async function serverReady(): Promise<void> {
  for (let i = 0; i < 120; i++) {
    try {
      const r = await fetch(`${BASE}/sessions/warmup/status`);
      if (r.status === 404) return;
    } catch {
      // not listening yet
    }
    await sleep(250);
  }
  throw new Error("session service did not come up");
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "netprotect.cli", "serve", "--port", String(PORT)], {
    cwd: "..",
    stdio: "ignore",
  });
  await serverReady();
});

afterAll(() => {
  server?.kill();
});

interface Scripted {
  controller: SeatController;
  root: HTMLElement;
  clicked: [number, number, string][];
}

async function createSession(config: Record<string, unknown>, sessionId: string) {
  const response = await fetch(`${BASE}/sessions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ config, session_id: sessionId }),
  });
  expect(response.status).toBe(201);
  return (await response.json()) as {
    session_id: string;
    join_tokens: Record<string, string>;
  };
}

function startSeat(sessionId: string, token: string): Scripted {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const api = new SessionApi(BASE, sessionId, token, fetch);
  const controller = new SeatController(api, root, { pollIntervalMs: 15 });
  return { controller, root, clicked: [] };
}

function visibleActions(root: HTMLElement): string[] {
  return [...root.querySelectorAll("button.choice")].map(
    (b) => (b as HTMLElement).dataset.action!,
  );
}

async function waitFor(predicate: () => boolean, what: string, ms = 30_000): Promise<void> {
  const start = Date.now();
  while (!predicate()) {
    if (Date.now() - start > ms) throw new Error(`timed out waiting for ${what}`);
    await sleep(10);
  }
}

describe("scripted live session", () => {
  it("completes two 10-round parts through the UI and the log matches", async () => {
    const config = {
      session_type: "net_then_ind_decoy",
      master_seed: 424,
      groups: [[
        { kind: "human" },
        { kind: "decoy_susceptible", utility: "risk_neutral", logit_temperature: 8.0, theta: 2.0 },
        { kind: "decoy_susceptible", utility: "risk_neutral", logit_temperature: 8.0, theta: 2.0 },
        { kind: "eu", utility: "risk_neutral", logit_temperature: 8.0 },
        { kind: "myopic_br", utility: "risk_neutral" },
        { kind: "random", p_vector: [0.4, 0.4, 0.2] },
      ]],
    };
    const created = await createSession(config, "ui-flow");
    const token = created.join_tokens["A"];
    expect(token).toBeTruthy();

    const seat = startSeat("ui-flow", token);
    await seat.controller.start();

    // the human cycles through the menu: x, no, y, x, no, y, ...
    const plan = ["token_x", "no_buy", "token_y"];
    let planIndex = 0;

    for (let step = 0; step < 20; step++) {
      const action = plan[planIndex++ % plan.length];
      // wait until the choice screen is interactive (button present + enabled)
      await waitFor(() => {
        const button = seat.root.querySelector(
          `button[data-action="${action}"]`,
        ) as HTMLButtonElement | null;
        return button !== null && !button.disabled;
      }, `clickable choice screen #${step + 1}`);

      const state = seat.controller.current()!;
      expect(state.phase.kind).toBe("collecting");
      const actions = visibleActions(seat.root);
      expect(actions).toEqual(["no_buy", "token_x", "token_y"]);  // decoy menus

      const button = seat.root.querySelector(
        `button[data-action="${action}"]`,
      ) as HTMLButtonElement;
      button.click();
      seat.clicked.push([state.phase.part, state.phase.round, action]);

      await waitFor(() => {
        const cont = seat.root.querySelector("button.continue") as HTMLButtonElement | null;
        return cont !== null && !cont.disabled;
      }, `feedback screen #${step + 1}`);

      // feedback shows all six members; choice controls are gone
      expect(seat.root.querySelectorAll("tr.member")).toHaveLength(6);
      expect(seat.root.querySelectorAll("button.choice")).toHaveLength(0);
      (seat.root.querySelector("button.continue") as HTMLButtonElement).click();
    }

    await waitFor(() => seat.controller.current()?.phase.kind === "finished",
                  "finished screen");
    seat.controller.stop();
    expect(seat.root.textContent).toContain("Session finished");
    expect(seat.clicked).toHaveLength(20);

    // the server log's seat-A rows must equal the clicked sequence exactly
    const log = await (await fetch(`${BASE}/sessions/ui-flow/log?fmt=csv`)).text();
    const lines = log.trim().split("\n");
    expect(lines).toHaveLength(121);
    const header = lines[0].split(",");
    const posIdx = header.indexOf("position");
    const partIdx = header.indexOf("part");
    const roundIdx = header.indexOf("round");
    const actionIdx = header.indexOf("action");
    const seatRows = lines
      .slice(1)
      .map((line) => line.split(","))
      .filter((cells) => cells[posIdx] === "A")
      .map((cells) => [Number(cells[partIdx]), Number(cells[roundIdx]), cells[actionIdx]]);
    expect(seatRows).toEqual(seat.clicked);
  });

  it("never renders an inadmissible action in baseline parts", async () => {
    const config = {
      session_type: "ind_then_net_baseline",
      master_seed: 77,
      groups: [[
        { kind: "human" },
        { kind: "random", p_vector: [0.5, 0.5] },
        { kind: "random", p_vector: [0.5, 0.5] },
        { kind: "random", p_vector: [0.5, 0.5] },
        { kind: "random", p_vector: [0.5, 0.5] },
        { kind: "random", p_vector: [0.5, 0.5] },
      ]],
    };
    const created = await createSession(config, "ui-baseline");
    const seat = startSeat("ui-baseline", created.join_tokens["A"]);
    await seat.controller.start();

    // round 1 is collecting right after the join; a forged Token Y
    // submission must be rejected by the server as well
    await waitFor(() => seat.controller.current()?.phase.kind === "collecting",
                  "first collecting screen");
    const forged = await fetch(`${BASE}/sessions/ui-baseline/choice`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Seat-Token": created.join_tokens["A"],
      },
      body: JSON.stringify({ part: 1, round: 1, action: "token_y" }),
    });
    expect(forged.status).toBe(400);

    for (let step = 0; step < 3; step++) {
      await waitFor(() => {
        const button = seat.root.querySelector(
          'button[data-action="no_buy"]') as HTMLButtonElement | null;
        return button !== null && !button.disabled;
      }, "collecting screen");
      // exactly the two admissible options; Token Y cannot be clicked
      expect(visibleActions(seat.root)).toEqual(["no_buy", "token_x"]);
      expect(seat.root.querySelector('button[data-action="token_y"]')).toBeNull();
      (seat.root.querySelector('button[data-action="no_buy"]') as HTMLButtonElement).click();
      await waitFor(() => {
        const cont = seat.root.querySelector("button.continue") as HTMLButtonElement | null;
        return cont !== null && !cont.disabled;
      }, "feedback");
      (seat.root.querySelector("button.continue") as HTMLButtonElement).click();
    }
    seat.controller.stop();
  });
});
