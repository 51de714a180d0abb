// Browser entry: relation picker plus the review loop, all state
// server-side. Served by the pipeline's `screen` command.

import { ScreeningApi } from "./api.js";
import { ReviewController } from "./controller.js";
import { bindKeys } from "./keyboard.js";
import { renderState } from "./render.js";

const api = new ScreeningApi("");
const root = document.getElementById("root") as HTMLElement;
const picker = document.getElementById("relations") as HTMLElement;

let controller: ReviewController | null = null;

function selectRelation(relation: string): void {
  controller = new ReviewController(api, relation, (state) => {
    root.innerHTML = renderState(state);
  });
  void controller.refresh();
}

async function drawPicker(): Promise<void> {
  try {
    const rows = await api.relations();
    picker.innerHTML = "";
    for (const row of rows) {
      const button = document.createElement("button");
      const status = row.finalized ? "✓" : `${row.decided}/${row.total}`;
      button.textContent = `${row.id} (${status})`;
      button.addEventListener("click", () => selectRelation(row.id));
      picker.appendChild(button);
    }
    const first = rows.find((r) => !r.finalized) ?? rows[0];
    if (first) {
      selectRelation(first.id);
    }
  } catch (err) {
    picker.innerHTML = `<p class="error">cannot reach screening server: ${err}</p>`;
  }
}

bindKeys(window, {
  accept: () => void controller?.decide("accept"),
  reject: () => void controller?.decide("reject"),
  skip: () => void controller?.decide("skip"),
  finalize: () => void controller?.finalize(),
  reload: () => void controller?.refresh().then(() => drawPicker()),
});

void drawPicker();
