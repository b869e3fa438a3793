import { askQuestion } from "./api.js";
import { renderError, renderHistory, renderResult } from "./render.js";
import { SessionState } from "./state.js";

function mustGet<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) {
    throw new Error(`missing #${id} in index.html`);
  }
  return element as T;
}

const form = mustGet<HTMLFormElement>("ask-form");
const editor = mustGet<HTMLInputElement>("question");
const submit = mustGet<HTMLButtonElement>("submit");
const banner = mustGet<HTMLElement>("error-banner");
const results = mustGet<HTMLElement>("results");
const historyList = mustGet<HTMLElement>("history");

const state = new SessionState((question) => askQuestion(question));

function sync(): void {
  submit.disabled = !state.canSubmit(editor.value);
  renderError(banner, state.error);
  renderHistory(historyList, state.history, (entry) => {
    renderResult(results, entry.result);
  });
}

editor.addEventListener("input", sync);

form.addEventListener("submit", async (event) => {
  event.preventDefault();
  const question = editor.value;
  if (!state.canSubmit(question)) {
    return;
  }
  submit.disabled = true;
  const result = await state.submit(question);
  if (result) {
    renderResult(results, result);
  }
  sync();
});

// Clicking a highlighted span or a title copies its text into the editor
// for refinement; nothing is auto-submitted.
results.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.classList.contains("highlight") || target.classList.contains("card-title")) {
    editor.value = target.textContent ?? "";
    editor.focus();
    sync();
  }
});

sync();
