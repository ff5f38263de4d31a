// Browser bootstrap: server URL, session id and join token come from the
// query string (?server=...&session=...&token=...) or a small form.

import { SessionApi } from "./api.js";
import { SeatController } from "./app.js";

function startFromParams(root: HTMLElement): boolean {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? window.location.origin;
  const session = params.get("session");
  const token = params.get("token");
  if (!session || !token) return false;
  const api = new SessionApi(server, session, token);
  new SeatController(api, root).start();
  return true;
}

function renderJoinForm(root: HTMLElement): void {
  root.innerHTML = `
    <form class="join-form">
      <h2>Join a session</h2>
      <label>Server <input name="server" value="${window.location.origin}"></label>
      <label>Session id <input name="session" required></label>
      <label>Join token <input name="token" required></label>
      <button type="submit">Join</button>
    </form>`;
  root.querySelector("form")!.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(event.target as HTMLFormElement);
    const query = new URLSearchParams({
      server: String(data.get("server")),
      session: String(data.get("session")),
      token: String(data.get("token")),
    });
    window.location.search = query.toString();
  });
}

const root = document.getElementById("app");
if (root && !startFromParams(root)) {
  renderJoinForm(root);
}
