// Wires user gestures to API calls and state updates. Route requests follow a
// latest-wins policy: a newer request per scheme aborts and supersedes the
// older one, and endpoint changes cancel everything in flight so a stale
// response can never repopulate a cleared overlay.

import { ApiError, describeError, type RecommenderApi, type RoutePayload, type Scheme } from './api';
import { buildInfobox } from './chart';
import {
    endpointsReady,
    initialState,
    placeEndpoint,
    selectStation,
    setBanner,
    setInfobox,
    setStations,
    setWeight,
    storeRoute,
    storeRouteError,
    type MapPoint,
    type UiState,
} from './state';
import { toFactorWeights } from './weights';

const SCHEMES: readonly Scheme[] = ['shortest', 'safest', 'optimal'];

function isAbort(err: unknown): boolean {
    return err instanceof Error && err.name === 'AbortError';
}

export class Controller {
    private current: UiState = initialState();
    private inflight = new Map<Scheme, AbortController>();
    private serials = new Map<Scheme, number>();
    private infoboxSerial = 0;

    constructor(
        private api: RecommenderApi,
        private onChange: (state: UiState) => void = () => undefined,
    ) {}

    get state(): UiState {
        return this.current;
    }

    private update(next: UiState): void {
        this.current = next;
        this.onChange(next);
    }

    async refreshStations(): Promise<void> {
        try {
            const doc = await this.api.stations();
            this.update(setStations(this.current, doc.stations));
        } catch (err) {
            // Keep the existing marker layer; just surface the failure.
            this.update(setBanner(this.current, `station refresh failed: ${describeError(err)}`));
        }
    }

    async clickMap(point: MapPoint): Promise<void> {
        this.cancelRouteRequests();
        this.update(placeEndpoint(this.current, point));
        if (endpointsReady(this.current)) await this.requestRoutes();
    }

    async moveSlider(index: 0 | 1 | 2, value: number): Promise<void> {
        this.update(setWeight(this.current, index, value));
        if (endpointsReady(this.current)) await this.requestRoute('optimal');
    }

    /** One POST per scheme: shortest, safest, and optimal with the slider weights. */
    async requestRoutes(): Promise<void> {
        await Promise.all(SCHEMES.map((scheme) => this.requestRoute(scheme)));
    }

    async requestRoute(scheme: Scheme): Promise<void> {
        const payload = this.routePayload(scheme);
        if (payload === null) return;
        this.inflight.get(scheme)?.abort();
        const aborter = new AbortController();
        this.inflight.set(scheme, aborter);
        const serial = (this.serials.get(scheme) ?? 0) + 1;
        this.serials.set(scheme, serial);
        try {
            const doc = await this.api.route(payload, aborter.signal);
            if (this.serials.get(scheme) !== serial) return;
            this.update(storeRoute(this.current, scheme, doc));
        } catch (err) {
            if (this.serials.get(scheme) !== serial || isAbort(err)) return;
            this.update(storeRouteError(this.current, scheme, describeError(err)));
        }
    }

    async selectStation(stationId: string | null): Promise<void> {
        this.update(selectStation(this.current, stationId));
        if (stationId === null) return;
        const record = this.current.stations.find((s) => s.station_id === stationId);
        if (record === undefined) return;
        const serial = ++this.infoboxSerial;
        try {
            const history = await this.api.history(stationId);
            let prediction = null;
            let problem: string | null = null;
            try {
                prediction = await this.api.prediction(stationId);
            } catch (err) {
                if (err instanceof ApiError && err.status === 409) {
                    problem = describeError(err);
                } else {
                    throw err;
                }
            }
            if (serial !== this.infoboxSerial || this.current.selectedStation !== stationId) return;
            this.update(setInfobox(this.current, buildInfobox(record, history, prediction, problem)));
        } catch (err) {
            if (serial !== this.infoboxSerial) return;
            this.update(setBanner(this.current, `station ${stationId}: ${describeError(err)}`));
        }
    }

    private routePayload(scheme: Scheme): RoutePayload | null {
        const { origin, destination, weights } = this.current;
        if (origin === null || destination === null) return null;
        const payload: RoutePayload = {
            origin: { lat: origin.lat, lon: origin.lon },
            destination: { lat: destination.lat, lon: destination.lon },
            scheme,
        };
        if (scheme === 'optimal') payload.weights = toFactorWeights(weights);
        return payload;
    }

    private cancelRouteRequests(): void {
        for (const scheme of SCHEMES) {
            this.inflight.get(scheme)?.abort();
            this.serials.set(scheme, (this.serials.get(scheme) ?? 0) + 1);
        }
    }
}
