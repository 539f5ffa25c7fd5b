// End-to-end checks against a real engine process serving the generated
// fixture. Everything goes through the same modules the browser uses: the
// ApiClient, the Controller, and the overlay/chart builders.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import net from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ApiClient, ApiError } from '../src/api';
import { pointCounts, renderChartSvg } from '../src/chart';
import { markerColor, MIDPOINT, UNKNOWN_GRAY } from '../src/color';
import { Controller } from '../src/controller';
import { overlayFromDocument, overlayGeometryBytes, sameGeometry } from '../src/overlays';
import { writeFixture, type FixtureInfo } from './fixture';

let child: ChildProcess | null = null;
let serverLog = '';
let tempDir: string;
let fixture: FixtureInfo;
let api: ApiClient;

function freePort(): Promise<number> {
    return new Promise((resolve, reject) => {
        const probe = net.createServer();
        probe.on('error', reject);
        probe.listen(0, '127.0.0.1', () => {
            const port = (probe.address() as net.AddressInfo).port;
            probe.close(() => resolve(port));
        });
    });
}

async function waitForHealth(base: string, deadlineMs: number): Promise<void> {
    const deadline = Date.now() + deadlineMs;
    let lastError: unknown = null;
    while (Date.now() < deadline) {
        if (child?.exitCode !== null) break;
        try {
            const res = await fetch(`${base}/health`);
            if (res.ok) return;
        } catch (err) {
            lastError = err;
        }
        await new Promise((r) => setTimeout(r, 150));
    }
    throw new Error(`engine did not come up (${lastError})\nserver output:\n${serverLog}`);
}

beforeAll(async () => {
    tempDir = mkdtempSync(join(tmpdir(), 'bike-ui-'));
    const port = await freePort();
    fixture = writeFixture(tempDir, port);
    child = spawn('python3', ['-m', 'safebike', 'serve', '--config', fixture.configPath], {
        stdio: ['ignore', 'pipe', 'pipe'],
    });
    child.stdout?.on('data', (d: Buffer) => { serverLog += d.toString(); });
    child.stderr?.on('data', (d: Buffer) => { serverLog += d.toString(); });
    api = new ApiClient(`http://127.0.0.1:${port}`);
    await waitForHealth(`http://127.0.0.1:${port}`, 30_000);
});

afterAll(async () => {
    if (child !== null) {
        child.kill('SIGTERM');
        await new Promise((resolve) => {
            child!.once('exit', resolve);
            setTimeout(resolve, 3_000);
        });
    }
    rmSync(tempDir, { recursive: true, force: true });
});

async function plannedController(): Promise<Controller> {
    const controller = new Controller(api);
    await controller.refreshStations();
    await controller.clickMap(fixture.originClick);
    await controller.clickMap(fixture.destinationClick);
    return controller;
}

describe('special-case overlays against the live engine', () => {
    it('corner weights reproduce the shortest and safest overlays byte for byte', async () => {
        const controller = await plannedController();
        const routes = controller.state.routes;
        expect(routes.shortest).toBeDefined();
        expect(routes.safest).toBeDefined();
        expect(routes.optimal).toBeDefined();

        const shortest = overlayFromDocument(routes.shortest!);
        const safest = overlayFromDocument(routes.safest!);
        const optimalDefault = overlayFromDocument(routes.optimal!);

        // The planted cluster forces a real detour, so the comparison below
        // cannot pass by every scheme drawing the same line.
        expect(sameGeometry(shortest, safest)).toBe(false);
        expect(sameGeometry(optimalDefault, shortest)).toBe(false);

        await controller.moveSlider(0, 1);
        const lengthOnly = controller.state.routes.optimal!;
        expect(lengthOnly.weights).toEqual({ alpha: 1, beta: 0, gamma: 0 });
        const lengthOverlay = overlayFromDocument(lengthOnly);
        expect(overlayGeometryBytes(lengthOverlay)).toEqual(overlayGeometryBytes(shortest));
        expect(sameGeometry(lengthOverlay, shortest)).toBe(true);

        await controller.moveSlider(1, 1);
        const crimeOnly = controller.state.routes.optimal!;
        expect(crimeOnly.weights).toEqual({ alpha: 0, beta: 1, gamma: 0 });
        const crimeOverlay = overlayFromDocument(crimeOnly);
        expect(overlayGeometryBytes(crimeOverlay)).toEqual(overlayGeometryBytes(safest));
        expect(sameGeometry(crimeOverlay, safest)).toBe(true);
    });

    it('the default optimal choice is the score argmin over the reported candidates', async () => {
        const controller = await plannedController();
        const doc = controller.state.routes.optimal!;
        expect(doc.chosen.origin_station_id).toBe(fixture.west);
        expect(doc.chosen.destination_station_id).toBe(fixture.east);
        const best = Math.min(...doc.alternatives.map((a) => a.score));
        expect(doc.chosen.score).toBe(best);
    });

    it('routes carry three legs in walk-bike-walk order with predicted counts', async () => {
        const controller = await plannedController();
        const overlay = overlayFromDocument(controller.state.routes.optimal!);
        expect(overlay.legs.map((l) => l.mode)).toEqual(['walk', 'bike', 'walk']);
        expect(overlay.markers.map((m) => m.role)).toEqual(['origin', 'destination']);
        expect(overlay.markers[0].label).toContain('PB 8');
        expect(overlay.markers[1].label).toContain('PD 15');
    });
});

describe('infobox charts against the live engine', () => {
    it('chart point counts equal the API history and prediction lengths', async () => {
        const controller = new Controller(api);
        await controller.refreshStations();
        await controller.selectStation(fixture.west);
        const model = controller.state.infobox!;

        const history = await api.history(fixture.west);
        const prediction = await api.prediction(fixture.west);
        const counts = pointCounts(model);
        expect(counts.history).toBe(history.points.length);
        expect(counts.prediction).toBe(prediction.times.length);
        expect(counts.prediction).toBe(prediction.predicted_bikes.length);

        const svg = renderChartSvg(model);
        const circles = (svg.match(/<circle /g) ?? []).length;
        expect(circles).toBe(2 * (counts.history + counts.prediction));

        // fixture sanity so the equalities above cannot hold vacuously
        expect(history.points.length).toBe(fixture.expectedHistoryPoints);
        expect(prediction.times.length).toBe(fixture.defaultHorizon);
        expect(prediction.degraded).toBe(false);
    });

    it('holds for the second station as well', async () => {
        const controller = new Controller(api);
        await controller.refreshStations();
        await controller.selectStation(fixture.east);
        const counts = pointCounts(controller.state.infobox!);
        const history = await api.history(fixture.east);
        const prediction = await api.prediction(fixture.east);
        expect(counts).toEqual({
            history: history.points.length,
            prediction: prediction.times.length,
        });
        expect(counts.history).toBeGreaterThan(0);
    });

    it('a station without status gets a history-only chart and an annotation', async () => {
        const controller = new Controller(api);
        await controller.refreshStations();
        await controller.selectStation(fixture.ghost);
        const model = controller.state.infobox!;
        expect(pointCounts(model)).toEqual({ history: 0, prediction: 0 });
        expect(model.notes.join(' ')).toContain('prediction unavailable');
        const history = await api.history(fixture.ghost);
        expect(history.points.length).toBe(0);
        await expect(api.prediction(fixture.ghost)).rejects.toThrowError(ApiError);
    });
});

describe('station layer against the live engine', () => {
    it('colors known stations by fill ratio and silent ones gray', async () => {
        const doc = await api.stations();
        const byId = new Map(doc.stations.map((s) => [s.station_id, s]));
        const west = byId.get(fixture.west)!;
        expect(west.status).toBe('known');
        expect(west.ratio).toBe(0.5);
        expect(markerColor(west.ratio!)).toBe(MIDPOINT);
        const ghost = byId.get(fixture.ghost)!;
        expect(ghost.status).toBe('unknown');
        expect(markerColor(null)).toBe(UNKNOWN_GRAY);
    });
});

describe('structured route errors against the live engine', () => {
    it('reports no-station-in-range inline for every scheme', async () => {
        const controller = new Controller(api);
        const farSouth = { lat: 40.725, lon: -73.99 };
        await controller.clickMap(farSouth);
        await controller.clickMap(fixture.destinationClick);
        for (const scheme of ['shortest', 'safest', 'optimal'] as const) {
            expect(controller.state.routes[scheme]).toBeUndefined();
            expect(controller.state.routeErrors[scheme]).toBe('no station in range of the origin');
        }
    });
});
