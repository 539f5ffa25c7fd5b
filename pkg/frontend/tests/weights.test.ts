import { describe, expect, it } from 'vitest';
import {
    DEFAULT_PARTS,
    displayParts,
    moveSlider,
    partsSum,
    SCALE,
    toFactorWeights,
    type Parts,
} from '../src/weights';

// Deterministic PRNG so the random-walk invariant check is reproducible.
function mulberry32(seed: number): () => number {
    let a = seed >>> 0;
    return () => {
        a = (a + 0x6d2b79f5) >>> 0;
        let t = a;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

describe('default weights', () => {
    it('sum to the full scale', () => {
        expect(partsSum(DEFAULT_PARTS)).toBe(SCALE);
    });

    it('map to the default factor vector exactly', () => {
        expect(toFactorWeights(DEFAULT_PARTS)).toEqual({ alpha: 0.3, beta: 0.3, gamma: 0.4 });
    });

    it('display as two-decimal labels', () => {
        expect(displayParts(DEFAULT_PARTS)).toEqual(['0.30', '0.30', '0.40']);
    });
});

describe('moveSlider', () => {
    it('sliding one control to 1 leaves the exact corner', () => {
        const parts = moveSlider(DEFAULT_PARTS, 0, 1);
        expect(parts).toEqual([SCALE, 0, 0]);
        expect(toFactorWeights(parts)).toEqual({ alpha: 1, beta: 0, gamma: 0 });
    });

    it('sliding the second control to 1 gives the other corner', () => {
        const parts = moveSlider(DEFAULT_PARTS, 1, 1);
        expect(toFactorWeights(parts)).toEqual({ alpha: 0, beta: 1, gamma: 0 });
    });

    it('rescales the other two proportionally', () => {
        // remaining 5000 split over 3000:4000 -> 2143 (rounded) and the rest
        const parts = moveSlider(DEFAULT_PARTS, 0, 0.5);
        expect(parts).toEqual([5000, 2143, 2857]);
    });

    it('splits evenly when the other two are both zero', () => {
        const corner: Parts = [SCALE, 0, 0];
        expect(moveSlider(corner, 0, 0.4)).toEqual([4000, 3000, 3000]);
    });

    it('clamps values outside [0, 1]', () => {
        expect(moveSlider(DEFAULT_PARTS, 2, 1.7)).toEqual([0, 0, SCALE]);
        expect(moveSlider(DEFAULT_PARTS, 2, -0.3)[2]).toBe(0);
    });

    it('rejects non-finite input', () => {
        expect(() => moveSlider(DEFAULT_PARTS, 0, Number.NaN)).toThrow(/finite/);
    });

    it('keeps the exact-sum invariant over a long random walk', () => {
        const rng = mulberry32(20170523);
        let parts: Parts = DEFAULT_PARTS;
        for (let step = 0; step < 2000; step++) {
            const index = Math.floor(rng() * 3) as 0 | 1 | 2;
            // slider granularity is 0.01
            const value = Math.round(rng() * 100) / 100;
            parts = moveSlider(parts, index, value);
            expect(partsSum(parts)).toBe(SCALE);
            for (const p of parts) {
                expect(Number.isInteger(p)).toBe(true);
                expect(p).toBeGreaterThanOrEqual(0);
                expect(p).toBeLessThanOrEqual(SCALE);
            }
            const w = toFactorWeights(parts);
            for (const v of [w.alpha, w.beta, w.gamma]) {
                expect(v).toBeGreaterThanOrEqual(0);
                expect(v).toBeLessThanOrEqual(1);
            }
            expect(Math.abs(w.alpha + w.beta + w.gamma - 1)).toBeLessThanOrEqual(1e-9);
        }
    });

    it('moving a slider onto its current value is a no-op', () => {
        const parts = moveSlider(DEFAULT_PARTS, 1, 0.3);
        expect(parts).toEqual([3000, 3000, 4000]);
    });
});
