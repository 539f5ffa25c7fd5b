// Infobox model: headline counts plus a line chart of 24h history (solid) and
// the prediction horizon (dashed), one series each for bikes and docks. The
// chart is plain SVG assembled as a string, so it renders without a canvas and
// its point counts are directly inspectable.

import type { HistoryDocument, PredictionDocument, StationRecord } from './api';
import { BIKE_SIDE, DOCK_SIDE } from './color';

export interface SeriesPoint {
    t: string;
    value: number;
}

export interface ChartSeries {
    label: string;
    dashed: boolean;
    points: SeriesPoint[];
}

export interface InfoboxModel {
    stationId: string;
    name: string;
    headline: { bikes: number; docks: number } | null;
    series: ChartSeries[];
    notes: string[];
}

export function buildInfobox(
    station: StationRecord,
    history: HistoryDocument,
    prediction: PredictionDocument | null,
    predictionProblem?: string | null,
): InfoboxModel {
    const series: ChartSeries[] = [];
    const notes: string[] = [];

    const historyPoints = history.points;
    series.push({
        label: 'bikes',
        dashed: false,
        points: historyPoints.map((p) => ({ t: p.timestamp, value: p.bikes })),
    });
    series.push({
        label: 'docks',
        dashed: false,
        points: historyPoints.map((p) => ({ t: p.timestamp, value: p.docks })),
    });

    if (prediction !== null) {
        series.push({
            label: 'bikes (predicted)',
            dashed: true,
            points: prediction.times.map((t, i) => ({ t, value: prediction.predicted_bikes[i] })),
        });
        series.push({
            label: 'docks (predicted)',
            dashed: true,
            points: prediction.times.map((t, i) => ({ t, value: prediction.predicted_docks[i] })),
        });
        if (prediction.degraded) notes.push('prediction degraded');
    } else if (predictionProblem) {
        notes.push(`prediction unavailable: ${predictionProblem}`);
    }

    if (historyPoints.length === 0 && prediction === null) notes.push('no data');

    const headline = station.status === 'known' && station.bikes !== undefined && station.docks !== undefined
        ? { bikes: station.bikes, docks: station.docks }
        : null;

    return { stationId: station.station_id, name: station.name, headline, series, notes };
}

/** Chart points per segment: solid series carry history, dashed the prediction. */
export function pointCounts(model: InfoboxModel): { history: number; prediction: number } {
    const count = (dashed: boolean) => {
        const lengths = model.series.filter((s) => s.dashed === dashed).map((s) => s.points.length);
        return lengths.length > 0 ? Math.max(...lengths) : 0;
    };
    return { history: count(false), prediction: count(true) };
}

function seriesColor(label: string): string {
    return label.startsWith('bikes') ? BIKE_SIDE : DOCK_SIDE;
}

export function renderChartSvg(model: InfoboxModel, width = 320, height = 130): string {
    const margin = 6;
    const plotW = width - 2 * margin;
    const plotH = height - 2 * margin;

    // Shared time axis: every timestamp that appears in any series, in order.
    const timeline: string[] = [];
    for (const s of model.series) {
        for (const p of s.points) {
            if (!timeline.includes(p.t)) timeline.push(p.t);
        }
    }
    timeline.sort();

    const maxValue = Math.max(1, ...model.series.flatMap((s) => s.points.map((p) => p.value)));
    const x = (t: string) => {
        const i = timeline.indexOf(t);
        return timeline.length > 1 ? margin + (plotW * i) / (timeline.length - 1) : width / 2;
    };
    const y = (v: number) => margin + plotH * (1 - v / maxValue);

    const parts: string[] = [
        `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="infobox-chart">`,
    ];

    for (const s of model.series) {
        if (s.points.length === 0) continue;
        const color = seriesColor(s.label);
        const coords = s.points.map((p) => `${x(p.t).toFixed(2)},${y(p.value).toFixed(2)}`);
        const dash = s.dashed ? ' stroke-dasharray="5 4"' : '';
        if (coords.length > 1) {
            parts.push(`<polyline fill="none" stroke="${color}"${dash} points="${coords.join(' ')}"/>`);
        }
        for (const p of s.points) {
            parts.push(
                `<circle data-series="${s.label}" cx="${x(p.t).toFixed(2)}" cy="${y(p.value).toFixed(2)}" r="2.5" fill="${color}"/>`,
            );
        }
    }

    model.notes.forEach((note, i) => {
        parts.push(
            `<text x="${margin}" y="${height - margin - 12 * (model.notes.length - 1 - i)}" class="chart-note">${note}</text>`,
        );
    });

    parts.push('</svg>');
    return parts.join('');
}
