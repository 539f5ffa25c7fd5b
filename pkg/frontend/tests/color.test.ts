import { describe, expect, it } from 'vitest';
import {
    BIKE_SIDE,
    DOCK_SIDE,
    markerColor,
    MIDPOINT,
    stationRatio,
    UNKNOWN_GRAY,
} from '../src/color';
import { makeStation } from './builders';

describe('markerColor', () => {
    it('ratio 0 is the darkest dock-side color', () => {
        expect(markerColor(0)).toBe(DOCK_SIDE);
    });

    it('ratio 1 is the darkest bike-side color', () => {
        expect(markerColor(1)).toBe(BIKE_SIDE);
    });

    it('ratio 0.5 is the pale midpoint', () => {
        expect(markerColor(0.5)).toBe(MIDPOINT);
    });

    it('unknown status renders gray', () => {
        expect(markerColor(null)).toBe(UNKNOWN_GRAY);
    });

    it('clamps ratios outside [0, 1]', () => {
        expect(markerColor(-0.25)).toBe(DOCK_SIDE);
        expect(markerColor(1.4)).toBe(BIKE_SIDE);
    });

    it('always produces a six-digit hex color', () => {
        for (let i = 0; i <= 20; i++) {
            expect(markerColor(i / 20)).toMatch(/^#[0-9a-f]{6}$/);
        }
    });
});

describe('stationRatio', () => {
    it('passes through a known ratio', () => {
        expect(stationRatio(makeStation({ ratio: 0.25 }))).toBe(0.25);
    });

    it('is null for stations without a current status', () => {
        const ghost = makeStation({ status: 'unknown' });
        delete ghost.bikes;
        delete ghost.docks;
        delete ghost.ratio;
        expect(stationRatio(ghost)).toBeNull();
    });
});
