/** Transcript state: pure functions so the chat flow is testable without a DOM.
 *
 * One turn is in flight at a time; while pending the input stays disabled,
 * matching the server's per-session serialization. Failed turns keep the
 * text around so a retry button can resend it.
 */

import type { TurnResponse, TurnTrace } from "./api.js";

export type Author = "user" | "bot" | "error";

export interface TranscriptItem {
  author: Author;
  text: string;
  trace?: TurnTrace;
  steps?: string[];
  turnCounter?: number;
  timestamp: number;
}

export interface ChatState {
  items: TranscriptItem[];
  pending: boolean;
  failedText: string | null;
  lastTurnCounter: number;
}

export function initialState(): ChatState {
  return { items: [], pending: false, failedText: null, lastTurnCounter: 0 };
}

/** Optimistic user bubble; locks the input until the turn settles. */
export function beginTurn(state: ChatState, text: string, now: number): ChatState {
  if (state.pending || !text.trim()) {
    return state;
  }
  return {
    ...state,
    items: [...state.items, { author: "user", text, timestamp: now }],
    pending: true,
    failedText: null,
  };
}

/** Bot bubble carrying the routing trace; arrival order follows the
 * server's turn counter (per-session turns are serialized). */
export function completeTurn(state: ChatState, response: TurnResponse, now: number): ChatState {
  if (response.turn_counter <= state.lastTurnCounter) {
    // stale or out-of-order reply; the server serializes turns, so drop it
    return { ...state, pending: false };
  }
  return {
    ...state,
    items: [
      ...state.items,
      {
        author: "bot",
        text: response.response,
        trace: response.trace,
        steps: response.steps,
        turnCounter: response.turn_counter,
        timestamp: now,
      },
    ],
    pending: false,
    lastTurnCounter: response.turn_counter,
  };
}

/** Error bubble plus a retry affordance for the failed text. */
export function failTurn(state: ChatState, message: string, text: string, now: number): ChatState {
  return {
    ...state,
    items: [...state.items, { author: "error", text: message, timestamp: now }],
    pending: false,
    failedText: text,
  };
}

export function canSend(state: ChatState, text: string): boolean {
  return !state.pending && text.trim().length > 0;
}

/** Compact summary line for the collapsible trace inspector. */
export function traceSummary(trace: TurnTrace): string {
  const bits = [`module=${trace.module}`];
  if (trace.topic) bits.push(`topic=${trace.topic}`);
  if (trace.state) bits.push(`state=${trace.state}`);
  if (trace.intent) bits.push(`intent=${trace.intent}`);
  if (!trace.confident) bits.push("low-confidence");
  if (trace.profane) bits.push("profane");
  return bits.join(" ");
}
