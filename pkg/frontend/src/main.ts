/** Page wiring: fresh session per load, one in-flight turn per tab. */

import { ApiError, ChatApi } from "./api.js";
import {
  beginTurn,
  canSend,
  completeTurn,
  failTurn,
  initialState,
} from "./transcript.js";
import {
  beginSubmit,
  initialRating,
  selectStars,
  submitFailed,
  submitSucceeded,
} from "./rating.js";
import { renderComposer, renderRating, renderTranscript } from "./ui.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function boot(): Promise<void> {
  const api = new ChatApi("");
  const transcriptEl = el<HTMLDivElement>("transcript");
  const input = el<HTMLInputElement>("composer-input");
  const sendButton = el<HTMLButtonElement>("send");
  const retryButton = el<HTMLButtonElement>("retry");
  const ratingEl = el<HTMLDivElement>("rating");
  const ratingSubmit = el<HTMLButtonElement>("rating-submit");
  const ratingStatus = el<HTMLSpanElement>("rating-status");

  let chat = initialState();
  let rating = initialRating();
  const sessionId = await api.createSession();

  function paint(): void {
    renderTranscript(transcriptEl, chat);
    renderComposer(input, sendButton, retryButton, chat);
    renderRating(ratingEl, ratingSubmit, ratingStatus, rating);
  }

  async function send(text: string): Promise<void> {
    if (!canSend(chat, text)) {
      return;
    }
    chat = beginTurn(chat, text, Date.now());
    input.value = "";
    paint();
    try {
      const response = await api.sendTurn(sessionId, text);
      chat = completeTurn(chat, response, Date.now());
    } catch (err) {
      const message =
        err instanceof ApiError && err.status >= 500
          ? `server error (${err.status}): ${err.message}`
          : err instanceof ApiError
            ? err.message
            : "network error, is the service running?";
      chat = failTurn(chat, message, text, Date.now());
    }
    paint();
  }

  sendButton.addEventListener("click", () => void send(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void send(input.value);
    }
  });
  input.addEventListener("input", () => paint());
  retryButton.addEventListener("click", () => {
    const text = chat.failedText;
    if (text) {
      void send(text);
    }
  });

  ratingEl.querySelectorAll<HTMLButtonElement>("button[data-stars]").forEach((star) => {
    star.addEventListener("click", () => {
      rating = selectStars(rating, Number(star.dataset.stars));
      paint();
    });
  });
  ratingSubmit.addEventListener("click", async () => {
    const stars = rating.selected;
    if (stars === null) {
      return;
    }
    rating = beginSubmit(rating);
    paint();
    try {
      await api.submitRating(sessionId, stars);
      rating = submitSucceeded(rating);
    } catch (err) {
      rating = submitFailed(rating, err instanceof ApiError ? err.message : String(err));
    }
    paint();
  });

  paint();
}

void boot();
