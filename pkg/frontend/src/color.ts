// Station marker colors: a dock-heavy station renders in the teal family, a
// bike-heavy one in the blue family, with a pale midpoint between them.
// Stations without a current status stay neutral gray.

export const DOCK_SIDE = '#0b7285';
export const BIKE_SIDE = '#1864ab';
export const MIDPOINT = '#e7f5ff';
export const UNKNOWN_GRAY = '#9aa0a6';

function channels(hex: string): [number, number, number] {
    return [1, 3, 5].map((i) => parseInt(hex.slice(i, i + 2), 16)) as [number, number, number];
}

function hex2(value: number): string {
    return Math.round(value).toString(16).padStart(2, '0');
}

function lerp(a: string, b: string, t: number): string {
    const ca = channels(a);
    const cb = channels(b);
    const mixed = ca.map((v, i) => v + (cb[i] - v) * t);
    return `#${mixed.map(hex2).join('')}`;
}

/**
 * Color for a bikes/capacity fill ratio; `null` means status unknown.
 * Ratio 0 is the darkest dock-side color, 1 the darkest bike-side color.
 */
export function markerColor(ratio: number | null): string {
    if (ratio === null) return UNKNOWN_GRAY;
    const t = Math.min(1, Math.max(0, ratio));
    if (t <= 0.5) return lerp(DOCK_SIDE, MIDPOINT, t * 2);
    return lerp(MIDPOINT, BIKE_SIDE, (t - 0.5) * 2);
}

export function stationRatio(record: { status: string; ratio?: number }): number | null {
    return record.status === 'known' && record.ratio !== undefined ? record.ratio : null;
}
