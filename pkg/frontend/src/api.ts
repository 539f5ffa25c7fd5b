// Typed client for the route recommender HTTP API. All rendering elsewhere is
// driven by these documents; the UI computes no routing or prediction itself.

export interface StationRecord {
    station_id: string;
    name: string;
    lat: number;
    lon: number;
    capacity: number;
    status: 'known' | 'unknown';
    bikes?: number;
    docks?: number;
    ratio?: number;
    last_reported?: string;
}

export interface StationsDocument {
    api_version: number;
    stations: StationRecord[];
}

export interface HistoryPoint {
    timestamp: string;
    bikes: number;
    docks: number;
}

export interface HistoryDocument {
    api_version: number;
    station_id: string;
    points: HistoryPoint[];
}

export interface PredictionDocument {
    api_version: number;
    station_id: string;
    anchor_time: string;
    horizon: number;
    capacity: number;
    current_bikes: number;
    current_docks: number;
    times: string[];
    predicted_bikes: number[];
    predicted_docks: number[];
    degraded: boolean;
}

export type Scheme = 'shortest' | 'safest' | 'optimal';

export interface FactorWeights {
    alpha: number;
    beta: number;
    gamma: number;
}

export interface LineStringGeometry {
    type: 'LineString';
    coordinates: [number, number][];
}

export interface PointGeometry {
    type: 'Point';
    coordinates: [number, number];
}

export interface LegFeature {
    type: 'Feature';
    geometry: LineStringGeometry;
    properties: {
        kind: 'leg';
        mode: 'walk' | 'bike';
        length_m: number;
        crime_total: number;
        duration_s: number;
    };
}

export interface StationFeature {
    type: 'Feature';
    geometry: PointGeometry;
    properties: {
        kind: 'station';
        role: 'origin' | 'destination';
        station_id: string;
        name: string;
        at: string;
        predicted_bikes?: number;
        predicted_docks?: number;
    };
}

export type RouteFeature = LegFeature | StationFeature;

export interface ChosenRoute {
    origin_station_id: string;
    destination_station_id: string;
    score: number;
    total_length_m: number;
    total_crime: number;
    avl: number;
    pred_bikes_out: number;
    pred_docks_in: number;
    t_out: string;
    t_in: string;
    geometry: { type: 'FeatureCollection'; features: RouteFeature[] };
}

export interface RouteAlternative {
    origin_station_id: string;
    destination_station_id: string;
    score: number;
    total_length_m: number;
    total_crime: number;
    avl: number;
}

export interface RouteDocument {
    api_version: number;
    scheme: Scheme;
    weights: FactorWeights;
    chosen: ChosenRoute;
    alternatives: RouteAlternative[];
    normalization: { max_length: number; max_crime: number; max_avl: number };
}

export interface RoutePayload {
    origin: { lat: number; lon: number };
    destination: { lat: number; lon: number };
    departure_time?: string;
    scheme?: Scheme;
    weights?: FactorWeights;
}

/** Structured bodies the service puts in the `detail` of 4xx responses. */
export type ErrorDetail =
    | string
    | { error: 'no-station-in-range'; where: 'origin' | 'destination' }
    | { error: 'no-route' }
    | { error: 'no-current-status' };

export class ApiError extends Error {
    constructor(readonly status: number, readonly detail: ErrorDetail) {
        super(typeof detail === 'string' ? detail : detail.error);
        this.name = 'ApiError';
    }
}

export function describeError(err: unknown): string {
    if (err instanceof ApiError) {
        if (typeof err.detail === 'string') return err.detail;
        if (err.detail.error === 'no-station-in-range') {
            return `no station in range of the ${err.detail.where}`;
        }
        if (err.detail.error === 'no-route') return 'no route between the chosen stations';
        if (err.detail.error === 'no-current-status') return 'no current status for this station';
    }
    if (err instanceof Error) return err.message;
    return String(err);
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The surface the UI consumes; ApiClient is the HTTP implementation. */
export interface RecommenderApi {
    stations(): Promise<StationsDocument>;
    history(stationId: string, hours?: number): Promise<HistoryDocument>;
    prediction(stationId: string, horizon?: number): Promise<PredictionDocument>;
    route(payload: RoutePayload, signal?: AbortSignal): Promise<RouteDocument>;
}

export class ApiClient implements RecommenderApi {
    private fetchFn: FetchLike;

    constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
        this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
    }

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const res = await this.fetchFn(this.baseUrl + path, init);
        const body = await res.json().catch(() => null);
        if (!res.ok) {
            const detail = body && typeof body === 'object' && 'detail' in body
                ? (body.detail as ErrorDetail)
                : `request failed with status ${res.status}`;
            throw new ApiError(res.status, detail);
        }
        return body as T;
    }

    stations(): Promise<StationsDocument> {
        return this.request('/stations');
    }

    history(stationId: string, hours?: number): Promise<HistoryDocument> {
        const query = hours === undefined ? '' : `?hours=${hours}`;
        return this.request(`/stations/${encodeURIComponent(stationId)}/history${query}`);
    }

    prediction(stationId: string, horizon?: number): Promise<PredictionDocument> {
        const query = horizon === undefined ? '' : `?horizon=${horizon}`;
        return this.request(`/stations/${encodeURIComponent(stationId)}/prediction${query}`);
    }

    route(payload: RoutePayload, signal?: AbortSignal): Promise<RouteDocument> {
        return this.request('/route', {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify(payload),
            signal,
        });
    }
}
