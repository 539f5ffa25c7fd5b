// Slider weights live as integer basis points summing to exactly SCALE, so the
// triple always renormalizes to a valid unit-sum factor vector and sliding one
// control all the way to 1 leaves the exact corner (1, 0, 0) rather than a float
// neighbour of it. Display rounds to 2 decimals; the stored parts stay exact.

import type { FactorWeights } from './api';

export const SCALE = 10000;

export type Parts = readonly [number, number, number];

export const DEFAULT_PARTS: Parts = [3000, 3000, 4000];

/**
 * Move slider `index` to `value` (0..1); the other two rescale proportionally
 * to absorb the remainder, preserving the exact-sum invariant.
 */
export function moveSlider(parts: Parts, index: 0 | 1 | 2, value: number): Parts {
    if (!Number.isFinite(value)) throw new Error(`slider value must be finite: ${value}`);
    const target = Math.round(Math.min(1, Math.max(0, value)) * SCALE);
    const remaining = SCALE - target;
    const [j, k] = [0, 1, 2].filter((i) => i !== index) as [number, number];
    const rest = parts[j] + parts[k];
    const first = rest > 0
        ? Math.min(remaining, Math.round((parts[j] * remaining) / rest))
        : Math.round(remaining / 2);
    const next: [number, number, number] = [0, 0, 0];
    next[index] = target;
    next[j] = first;
    next[k] = remaining - first;
    return next;
}

export function toFactorWeights(parts: Parts): FactorWeights {
    return { alpha: parts[0] / SCALE, beta: parts[1] / SCALE, gamma: parts[2] / SCALE };
}

/** Two-decimal labels for the slider readouts. */
export function displayParts(parts: Parts): [string, string, string] {
    return [0, 1, 2].map((i) => (parts[i] / SCALE).toFixed(2)) as [string, string, string];
}

export function partsSum(parts: Parts): number {
    return parts[0] + parts[1] + parts[2];
}
