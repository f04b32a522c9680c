/** DOM rendering for the transcript and the star-rating widget. */

import type { ChatState, TranscriptItem } from "./transcript.js";
import { traceSummary } from "./transcript.js";
import type { RatingState } from "./rating.js";

function traceBlock(item: TranscriptItem): HTMLElement | null {
  if (!item.trace) {
    return null;
  }
  const details = document.createElement("details");
  details.className = "trace";
  const summary = document.createElement("summary");
  summary.textContent = traceSummary(item.trace);
  details.appendChild(summary);
  const steps = document.createElement("pre");
  steps.textContent = (item.steps ?? []).join("\n");
  details.appendChild(steps);
  return details;
}

export function renderTranscript(container: HTMLElement, state: ChatState): void {
  container.replaceChildren();
  for (const item of state.items) {
    const bubble = document.createElement("div");
    bubble.className = `bubble ${item.author}`;
    const text = document.createElement("p");
    text.textContent = item.text;
    bubble.appendChild(text);
    const trace = traceBlock(item);
    if (trace) {
      bubble.appendChild(trace);
    }
    container.appendChild(bubble);
  }
  container.scrollTop = container.scrollHeight;
}

export function renderComposer(
  input: HTMLInputElement,
  sendButton: HTMLButtonElement,
  retryButton: HTMLButtonElement,
  state: ChatState,
): void {
  input.disabled = state.pending;
  sendButton.disabled = state.pending || input.value.trim().length === 0;
  retryButton.hidden = state.failedText === null;
}

export function renderRating(
  container: HTMLElement,
  submitButton: HTMLButtonElement,
  status: HTMLElement,
  state: RatingState,
): void {
  const stars = container.querySelectorAll<HTMLButtonElement>("button[data-stars]");
  stars.forEach((star) => {
    const value = Number(star.dataset.stars);
    star.classList.toggle("filled", state.selected !== null && value <= state.selected);
    star.disabled = state.submitted || state.inFlight;
  });
  submitButton.disabled = !(state.selected !== null && !state.submitted && !state.inFlight);
  if (state.error) {
    status.textContent = state.error;
    status.className = "rating-status error";
  } else if (state.submitted) {
    status.textContent = `Thanks! You rated this chat ${state.selected} star${state.selected === 1 ? "" : "s"}.`;
    status.className = "rating-status done";
  } else {
    status.textContent = "Rate this conversation:";
    status.className = "rating-status";
  }
}
