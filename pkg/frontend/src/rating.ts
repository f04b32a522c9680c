/** Star-rating widget state: 1..5 stars, locked after a successful submit. */

export interface RatingState {
  selected: number | null;
  submitted: boolean;
  inFlight: boolean;
  error: string | null;
}

export function initialRating(): RatingState {
  return { selected: null, submitted: false, inFlight: false, error: null };
}

export function selectStars(state: RatingState, stars: number): RatingState {
  if (state.submitted || state.inFlight) {
    return state; // locked: double submit is rejected client-side
  }
  if (!Number.isInteger(stars) || stars < 1 || stars > 5) {
    return { ...state, error: "rating must be 1 to 5 stars" };
  }
  return { ...state, selected: stars, error: null };
}

export function canSubmit(state: RatingState): boolean {
  return state.selected !== null && !state.submitted && !state.inFlight;
}

export function beginSubmit(state: RatingState): RatingState {
  return canSubmit(state) ? { ...state, inFlight: true, error: null } : state;
}

export function submitSucceeded(state: RatingState): RatingState {
  return { ...state, inFlight: false, submitted: true, error: null };
}

export function submitFailed(state: RatingState, message: string): RatingState {
  return { ...state, inFlight: false, error: message };
}
