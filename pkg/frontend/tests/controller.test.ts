import { describe, expect, it } from 'vitest';
import {
    ApiError,
    type HistoryDocument,
    type PredictionDocument,
    type RecommenderApi,
    type RouteDocument,
    type RoutePayload,
    type StationsDocument,
} from '../src/api';
import { pointCounts } from '../src/chart';
import { Controller } from '../src/controller';
import { makeHistory, makePrediction, makeRouteDocument, makeStation } from './builders';

const A = { lat: 40.73, lon: -73.99 };
const B = { lat: 40.7316, lon: -73.981 };
const C = { lat: 40.74, lon: -73.985 };

interface RouteCall {
    payload: RoutePayload;
    signal?: AbortSignal;
    resolve(doc: RouteDocument): void;
    reject(err: unknown): void;
}

/** Scriptable stand-in for the HTTP client; route calls can be held open. */
class FakeApi implements RecommenderApi {
    routeCalls: RouteCall[] = [];
    autoRespond = true;
    stationsDoc: StationsDocument = { api_version: 1, stations: [makeStation()] };
    stationsError: Error | null = null;
    historyDoc: HistoryDocument = makeHistory(4);
    predictionDoc: PredictionDocument | null = makePrediction(6);
    predictionError: Error | null = null;
    historyError: Error | null = null;

    async stations(): Promise<StationsDocument> {
        if (this.stationsError) throw this.stationsError;
        return this.stationsDoc;
    }

    async history(): Promise<HistoryDocument> {
        if (this.historyError) throw this.historyError;
        return this.historyDoc;
    }

    async prediction(): Promise<PredictionDocument> {
        if (this.predictionError) throw this.predictionError;
        return this.predictionDoc!;
    }

    route(payload: RoutePayload, signal?: AbortSignal): Promise<RouteDocument> {
        return new Promise((resolve, reject) => {
            const call: RouteCall = { payload, signal, resolve, reject };
            this.routeCalls.push(call);
            if (this.autoRespond) {
                resolve(makeRouteDocument({ scheme: payload.scheme ?? 'optimal' }));
            }
        });
    }

    callsFor(scheme: string): RouteCall[] {
        return this.routeCalls.filter((c) => c.payload.scheme === scheme);
    }
}

function setup(autoRespond = true) {
    const api = new FakeApi();
    api.autoRespond = autoRespond;
    const controller = new Controller(api);
    return { api, controller };
}

describe('station refresh', () => {
    it('stores the registry on success', async () => {
        const { api, controller } = setup();
        await controller.refreshStations();
        expect(controller.state.stations).toEqual(api.stationsDoc.stations);
        expect(controller.state.banner).toBeNull();
    });

    it('keeps the existing layer and raises a banner on failure', async () => {
        const { api, controller } = setup();
        await controller.refreshStations();
        api.stationsError = new Error('connection refused');
        await controller.refreshStations();
        expect(controller.state.stations).toEqual(api.stationsDoc.stations);
        expect(controller.state.banner).toContain('connection refused');
    });
});

describe('route requests', () => {
    it('issues nothing while an endpoint is missing', async () => {
        const { api, controller } = setup();
        await controller.clickMap(A);
        expect(api.routeCalls).toHaveLength(0);
        await controller.moveSlider(2, 0.8);
        expect(api.routeCalls).toHaveLength(0);
    });

    it('requests all three schemes once both endpoints are set', async () => {
        const { api, controller } = setup();
        await controller.clickMap(A);
        await controller.clickMap(B);
        expect(api.routeCalls).toHaveLength(3);
        const schemes = api.routeCalls.map((c) => c.payload.scheme).sort();
        expect(schemes).toEqual(['optimal', 'safest', 'shortest']);
        expect(controller.state.routes.optimal).toBeDefined();
        expect(controller.state.routes.shortest).toBeDefined();
        expect(controller.state.routes.safest).toBeDefined();
    });

    it('sends slider weights only with the optimal request', async () => {
        const { api, controller } = setup();
        await controller.clickMap(A);
        await controller.clickMap(B);
        expect(api.callsFor('optimal')[0].payload.weights).toEqual({ alpha: 0.3, beta: 0.3, gamma: 0.4 });
        expect(api.callsFor('shortest')[0].payload.weights).toBeUndefined();
        expect(api.callsFor('safest')[0].payload.weights).toBeUndefined();
    });

    it('a slider change re-requests only the optimal route', async () => {
        const { api, controller } = setup();
        await controller.clickMap(A);
        await controller.clickMap(B);
        await controller.moveSlider(0, 1);
        expect(api.routeCalls).toHaveLength(4);
        const last = api.routeCalls[3];
        expect(last.payload.scheme).toBe('optimal');
        expect(last.payload.weights).toEqual({ alpha: 1, beta: 0, gamma: 0 });
    });

    it('weights in every payload are valid by construction', async () => {
        const { api, controller } = setup();
        await controller.clickMap(A);
        await controller.clickMap(B);
        for (const value of [0.9, 0.05, 1, 0]) {
            await controller.moveSlider(1, value);
        }
        for (const call of api.callsFor('optimal')) {
            const w = call.payload.weights!;
            expect(w.alpha).toBeGreaterThanOrEqual(0);
            expect(w.beta).toBeGreaterThanOrEqual(0);
            expect(w.gamma).toBeGreaterThanOrEqual(0);
            expect(w.alpha + w.beta + w.gamma).toBeGreaterThan(0);
        }
    });

    it('reports a structured route failure inline for its scheme', async () => {
        const { api, controller } = setup(false);
        await controller.clickMap(A);
        const done = controller.clickMap(B);
        api.callsFor('shortest')[0].resolve(makeRouteDocument({ scheme: 'shortest' }));
        api.callsFor('optimal')[0].resolve(makeRouteDocument({ scheme: 'optimal' }));
        api.callsFor('safest')[0].reject(new ApiError(409, { error: 'no-route' }));
        await done;
        expect(controller.state.routes.shortest).toBeDefined();
        expect(controller.state.routes.optimal).toBeDefined();
        expect(controller.state.routes.safest).toBeUndefined();
        expect(controller.state.routeErrors.safest).toBe('no route between the chosen stations');
    });
});

describe('latest-wins route requests', () => {
    it('aborts the superseded optimal request', async () => {
        const { api, controller } = setup(false);
        await controller.clickMap(A);
        const first = controller.clickMap(B);
        const slid = controller.moveSlider(2, 1);
        const optimals = api.callsFor('optimal');
        expect(optimals).toHaveLength(2);
        expect(optimals[0].signal?.aborted).toBe(true);
        expect(optimals[1].signal?.aborted).toBe(false);

        optimals[0].resolve(makeRouteDocument({ scheme: 'optimal', score: 0.9 }));
        optimals[1].resolve(makeRouteDocument({ scheme: 'optimal', score: 0.2 }));
        for (const scheme of ['shortest', 'safest'] as const) {
            api.callsFor(scheme)[0].resolve(makeRouteDocument({ scheme }));
        }
        await Promise.all([first, slid]);
        expect(controller.state.routes.optimal!.chosen.score).toBe(0.2);
    });

    it('drops a stale response that resolves after its successor', async () => {
        const { api, controller } = setup(false);
        await controller.clickMap(A);
        const first = controller.clickMap(B);
        const slid = controller.moveSlider(2, 1);
        const optimals = api.callsFor('optimal');

        optimals[1].resolve(makeRouteDocument({ scheme: 'optimal', score: 0.2 }));
        await slid;
        // the first request ignores its abort signal and answers late
        optimals[0].resolve(makeRouteDocument({ scheme: 'optimal', score: 0.9 }));
        for (const scheme of ['shortest', 'safest'] as const) {
            api.callsFor(scheme)[0].resolve(makeRouteDocument({ scheme }));
        }
        await first;
        expect(controller.state.routes.optimal!.chosen.score).toBe(0.2);
    });

    it('an endpoint change cancels in-flight requests and stale answers stay out', async () => {
        const { api, controller } = setup(false);
        await controller.clickMap(A);
        const pending = controller.clickMap(B);
        expect(api.routeCalls).toHaveLength(3);

        await controller.clickMap(C);
        for (const call of api.routeCalls) {
            expect(call.signal?.aborted).toBe(true);
            call.resolve(makeRouteDocument({ scheme: call.payload.scheme ?? 'optimal' }));
        }
        await pending;
        expect(controller.state.routes).toEqual({});
        expect(controller.state.origin).toEqual(C);
        expect(controller.state.destination).toBeNull();
    });
});

describe('station infobox', () => {
    it('builds the chart from history plus prediction', async () => {
        const { controller } = setup();
        await controller.refreshStations();
        await controller.selectStation('st-1');
        const model = controller.state.infobox!;
        expect(model.stationId).toBe('st-1');
        expect(pointCounts(model)).toEqual({ history: 4, prediction: 6 });
        expect(model.headline).toEqual({ bikes: 8, docks: 4 });
    });

    it('shows history only when the prediction has no current status', async () => {
        const { api, controller } = setup();
        api.predictionError = new ApiError(409, { error: 'no-current-status' });
        await controller.refreshStations();
        await controller.selectStation('st-1');
        const model = controller.state.infobox!;
        expect(pointCounts(model)).toEqual({ history: 4, prediction: 0 });
        expect(model.notes.join(' ')).toContain('prediction unavailable');
    });

    it('raises a banner naming the station when history fails', async () => {
        const { api, controller } = setup();
        api.historyError = new Error('boom');
        await controller.refreshStations();
        await controller.selectStation('st-1');
        expect(controller.state.infobox).toBeNull();
        expect(controller.state.banner).toContain('st-1');
        expect(controller.state.banner).toContain('boom');
    });

    it('ignores ids that are not in the registry', async () => {
        const { controller } = setup();
        await controller.refreshStations();
        await controller.selectStation('st-nope');
        expect(controller.state.infobox).toBeNull();
        expect(controller.state.banner).toBeNull();
    });
});
