/** Browser glue: find a session, wire the panels, route button clicks
 * through the workbench. All logic lives in the imported modules.
 */

import { ApiClient } from "./api.js";
import { histogramSvg, tradeOffSvg } from "./charts.js";
import { Workbench, tradeOffPoints } from "./state.js";
import type { SessionView } from "./state.js";
import {
  bannerHtml,
  commitButtonAttrs,
  expiredScreen,
  ledgerTimeline,
  previewPanel,
  reportCard,
  utilityCard,
} from "./render.js";
import type { StepDoc } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node;
}

function renderAll(view: SessionView): void {
  if (view.expired) {
    el("main").innerHTML = expiredScreen(view.sessionId);
    return;
  }
  el("banner").innerHTML = bannerHtml(view.banner);
  el("session-id").textContent = view.sessionId;
  if (view.report) el("report").innerHTML = reportCard(view.report);
  if (view.utility) el("utility").innerHTML = utilityCard(view.utility);
  if (view.histogram) el("histogram").innerHTML = histogramSvg(view.histogram);
  el("tradeoff").innerHTML = tradeOffSvg(tradeOffPoints(view));
  el("preview").innerHTML = previewPanel(view.preview);
  el("ledger").innerHTML = ledgerTimeline(view.ledger);
  const commit = el("commit") as HTMLButtonElement;
  commit.disabled = commitButtonAttrs(view) === "disabled";
}

function candidateFromForm(): StepDoc | null {
  const raw = (el("candidate") as HTMLTextAreaElement).value.trim();
  if (raw === "") return null;
  try {
    return JSON.parse(raw) as StepDoc;
  } catch {
    el("banner").innerHTML = bannerHtml("candidate step is not valid JSON");
    return null;
  }
}

async function bootstrap(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? window.location.origin);
  let sessionId = params.get("session");
  if (sessionId === null) {
    const sessions = await api.listSessions();
    const first = sessions[0];
    if (first === undefined) {
      el("main").innerHTML =
        `<p class="hint">No sessions on the server. Start it with --demo ` +
        `or create one via POST /sessions, then reload.</p>`;
      return;
    }
    sessionId = first.id;
  }

  const bench = new Workbench(api, sessionId);
  bench.onChange(renderAll);

  el("preview-btn").addEventListener("click", () => {
    const step = candidateFromForm();
    if (step !== null) void bench.preview(step);
  });
  el("discard-btn").addEventListener("click", () => bench.discardPreview());
  el("commit").addEventListener("click", () => void bench.commitPreviewed());
  for (const button of document.querySelectorAll<HTMLButtonElement>(".quick-step")) {
    button.addEventListener("click", () => {
      (el("candidate") as HTMLTextAreaElement).value = button.dataset.step ?? "";
    });
  }

  await bench.refresh();
}

void bootstrap();
