import { buildResultCards } from "./view.js";
import type { HistoryEntry } from "./state.js";
import type { QueryResult } from "./types.js";

// DOM rendering. Text lands via textContent only, so what you see is
// byte-for-byte what the service sent.

export function renderResult(container: HTMLElement, result: QueryResult): void {
  container.textContent = "";

  if (result.generated) {
    const card = document.createElement("div");
    card.className = "result-card generated";
    const heading = document.createElement("h3");
    heading.textContent = result.generated.abstained
      ? "Generator abstained"
      : "Generated answer";
    const body = document.createElement("p");
    body.textContent = result.generated.text;
    card.append(heading, body);
    container.append(card);
  }

  for (const cardModel of buildResultCards(result)) {
    const card = document.createElement("div");
    card.className = "result-card";
    card.dataset.articleId = cardModel.articleId;

    const heading = document.createElement("h3");
    const title = document.createElement("span");
    title.className = "card-title";
    title.textContent = cardModel.title;
    const meta = document.createElement("span");
    meta.className = "card-meta";
    meta.textContent = ` #${cardModel.rank} (score ${cardModel.score.toFixed(4)})`;
    heading.append(title, meta);

    const context = document.createElement("p");
    context.className = "card-context";
    for (const segment of cardModel.segments) {
      if (segment.highlighted) {
        const mark = document.createElement("mark");
        mark.className = "highlight";
        mark.textContent = segment.text;
        context.append(mark);
      } else {
        context.append(document.createTextNode(segment.text));
      }
    }
    card.append(heading, context);
    container.append(card);
  }

  if (!result.hits.length && !result.generated) {
    const note = document.createElement("p");
    note.className = "diagnostics";
    note.textContent = result.diagnostics.length
      ? result.diagnostics.join("; ")
      : "No articles matched.";
    container.append(note);
  }
}

export function renderError(banner: HTMLElement, message: string | null): void {
  banner.textContent = message ?? "";
  banner.hidden = message === null;
}

export function renderHistory(
  list: HTMLElement,
  history: readonly HistoryEntry[],
  onPick: (entry: HistoryEntry) => void,
): void {
  list.textContent = "";
  for (const entry of [...history].reverse()) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = entry.question;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onPick(entry);
    });
    item.append(link);
    list.append(item);
  }
}
