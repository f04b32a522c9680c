import { describe, expect, it } from "vitest";

import {
  beginSubmit,
  canSubmit,
  initialRating,
  selectStars,
  submitFailed,
  submitSucceeded,
} from "../src/rating.js";

describe("rating state", () => {
  it("starts unselected and unsubmittable", () => {
    const state = initialRating();
    expect(state.selected).toBeNull();
    expect(canSubmit(state)).toBe(false);
  });

  it("selects stars in range", () => {
    const state = selectStars(initialRating(), 4);
    expect(state.selected).toBe(4);
    expect(canSubmit(state)).toBe(true);
  });

  it("rejects out-of-range values with an inline error", () => {
    for (const bad of [0, 6, 2.5]) {
      const state = selectStars(initialRating(), bad);
      expect(state.selected).toBeNull();
      expect(state.error).toContain("1 to 5");
    }
  });

  it("locks after a successful submit", () => {
    let state = selectStars(initialRating(), 5);
    state = beginSubmit(state);
    state = submitSucceeded(state);
    expect(state.submitted).toBe(true);
    expect(canSubmit(state)).toBe(false);
    // double submit rejected client-side: selection is frozen too
    expect(selectStars(state, 2)).toBe(state);
  });

  it("shows the server validation error inline and allows another try", () => {
    let state = selectStars(initialRating(), 3);
    state = beginSubmit(state);
    state = submitFailed(state, "stars must be an integer between 1 and 5");
    expect(state.error).toContain("stars");
    expect(state.submitted).toBe(false);
    expect(canSubmit(state)).toBe(true);
  });

  it("ignores re-selection while a submit is in flight", () => {
    let state = selectStars(initialRating(), 3);
    state = beginSubmit(state);
    expect(selectStars(state, 1)).toBe(state);
  });
});
