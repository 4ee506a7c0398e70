// Star ratings with optimistic updates: the card shows the new value
// immediately, and rolls back to the previous one if the gateway rejects it.

import type { ApiClient } from "./api.js";
import { ratingKey, setRating, type ViewModel } from "./viewmodel.js";

export type RatingOutcome =
  | { ok: true; stars: number }
  | { ok: false; rolledBackTo: number | null; error: string };

export async function submitRating(
  api: ApiClient,
  vm: ViewModel,
  eventId: number,
  snippetId: string,
  stars: number,
): Promise<RatingOutcome> {
  const previous = vm.ratings.get(ratingKey(eventId, snippetId)) ?? null;
  setRating(vm, eventId, snippetId, stars); // optimistic
  try {
    const response = await api.putRating(vm.sessionId, {
      event_id: eventId,
      snippet_id: snippetId,
      stars,
    });
    setRating(vm, eventId, snippetId, response.rating.stars);
    return { ok: true, stars: response.rating.stars };
  } catch (error) {
    setRating(vm, eventId, snippetId, previous); // rollback
    return {
      ok: false,
      rolledBackTo: previous,
      error: error instanceof Error ? error.message : String(error),
    };
  }
}
