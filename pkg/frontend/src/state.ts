// Pure UI state transitions. Route overlays are derived data, so any change to
// an endpoint throws them away; the controller decides what to re-request.

import type { RouteDocument, Scheme, StationRecord } from './api';
import type { InfoboxModel } from './chart';
import { DEFAULT_PARTS, moveSlider, type Parts } from './weights';

export interface MapPoint {
    lat: number;
    lon: number;
}

export interface UiState {
    stations: StationRecord[];
    origin: MapPoint | null;
    destination: MapPoint | null;
    weights: Parts;
    selectedStation: string | null;
    routes: Partial<Record<Scheme, RouteDocument>>;
    routeErrors: Partial<Record<Scheme, string>>;
    infobox: InfoboxModel | null;
    banner: string | null;
}

export function initialState(): UiState {
    return {
        stations: [],
        origin: null,
        destination: null,
        weights: DEFAULT_PARTS,
        selectedStation: null,
        routes: {},
        routeErrors: {},
        infobox: null,
        banner: null,
    };
}

export function setStations(state: UiState, stations: StationRecord[]): UiState {
    return { ...state, stations, banner: null };
}

export function setOrigin(state: UiState, point: MapPoint | null): UiState {
    return { ...state, origin: point, routes: {}, routeErrors: {} };
}

export function setDestination(state: UiState, point: MapPoint | null): UiState {
    return { ...state, destination: point, routes: {}, routeErrors: {} };
}

/** Map click: first sets the origin, second the destination, third starts over. */
export function placeEndpoint(state: UiState, point: MapPoint): UiState {
    if (state.origin === null) return setOrigin(state, point);
    if (state.destination === null) return setDestination(state, point);
    return setOrigin(setDestination(state, null), point);
}

export function setWeight(state: UiState, index: 0 | 1 | 2, value: number): UiState {
    return { ...state, weights: moveSlider(state.weights, index, value) };
}

export function selectStation(state: UiState, stationId: string | null): UiState {
    return { ...state, selectedStation: stationId, infobox: null };
}

export function storeRoute(state: UiState, scheme: Scheme, doc: RouteDocument): UiState {
    const routeErrors = { ...state.routeErrors };
    delete routeErrors[scheme];
    return { ...state, routes: { ...state.routes, [scheme]: doc }, routeErrors };
}

export function storeRouteError(state: UiState, scheme: Scheme, message: string): UiState {
    const routes = { ...state.routes };
    delete routes[scheme];
    return { ...state, routes, routeErrors: { ...state.routeErrors, [scheme]: message } };
}

export function setInfobox(state: UiState, infobox: InfoboxModel | null): UiState {
    return { ...state, infobox };
}

export function setBanner(state: UiState, banner: string | null): UiState {
    return { ...state, banner };
}

export function endpointsReady(state: UiState): boolean {
    return state.origin !== null && state.destination !== null;
}
