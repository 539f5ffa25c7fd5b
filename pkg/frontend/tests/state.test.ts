import { describe, expect, it } from 'vitest';
import {
    endpointsReady,
    initialState,
    placeEndpoint,
    selectStation,
    setDestination,
    setInfobox,
    setOrigin,
    setWeight,
    storeRoute,
    storeRouteError,
    type UiState,
} from '../src/state';
import { DEFAULT_PARTS } from '../src/weights';
import { makeRouteDocument, makeStation } from './builders';

const A = { lat: 40.73, lon: -73.99 };
const B = { lat: 40.7316, lon: -73.981 };
const C = { lat: 40.74, lon: -73.985 };

function stateWithRoutes(): UiState {
    let state = setDestination(setOrigin(initialState(), A), B);
    state = storeRoute(state, 'shortest', makeRouteDocument({ scheme: 'shortest' }));
    state = storeRouteError(state, 'safest', 'no route between the chosen stations');
    return state;
}

describe('initial state', () => {
    it('starts empty with the default weights', () => {
        const state = initialState();
        expect(state.origin).toBeNull();
        expect(state.destination).toBeNull();
        expect(state.weights).toEqual(DEFAULT_PARTS);
        expect(state.routes).toEqual({});
        expect(state.routeErrors).toEqual({});
        expect(state.banner).toBeNull();
        expect(endpointsReady(state)).toBe(false);
    });
});

describe('click-to-set endpoints', () => {
    it('first click sets the origin, second the destination', () => {
        const one = placeEndpoint(initialState(), A);
        expect(one.origin).toEqual(A);
        expect(one.destination).toBeNull();
        expect(endpointsReady(one)).toBe(false);

        const two = placeEndpoint(one, B);
        expect(two.origin).toEqual(A);
        expect(two.destination).toEqual(B);
        expect(endpointsReady(two)).toBe(true);
    });

    it('third click starts a new trip from the clicked point', () => {
        const two = placeEndpoint(placeEndpoint(initialState(), A), B);
        const three = placeEndpoint(two, C);
        expect(three.origin).toEqual(C);
        expect(three.destination).toBeNull();
    });
});

describe('route clearing', () => {
    it('changing the origin clears routes and route errors', () => {
        const next = setOrigin(stateWithRoutes(), C);
        expect(next.routes).toEqual({});
        expect(next.routeErrors).toEqual({});
    });

    it('changing the destination clears routes and route errors', () => {
        const next = setDestination(stateWithRoutes(), C);
        expect(next.routes).toEqual({});
        expect(next.routeErrors).toEqual({});
    });

    it('a restarting click clears routes too', () => {
        const next = placeEndpoint(stateWithRoutes(), C);
        expect(next.routes).toEqual({});
        expect(next.routeErrors).toEqual({});
    });

    it('slider movement leaves existing overlays in place', () => {
        const state = stateWithRoutes();
        const next = setWeight(state, 2, 0.9);
        expect(next.routes).toEqual(state.routes);
        expect(next.weights).not.toEqual(state.weights);
    });
});

describe('route bookkeeping', () => {
    it('storing a route clears that scheme error', () => {
        let state = stateWithRoutes();
        state = storeRoute(state, 'safest', makeRouteDocument({ scheme: 'safest' }));
        expect(state.routeErrors.safest).toBeUndefined();
        expect(state.routes.safest).toBeDefined();
    });

    it('storing an error drops the stale document for that scheme', () => {
        let state = stateWithRoutes();
        state = storeRouteError(state, 'shortest', 'engine unreachable');
        expect(state.routes.shortest).toBeUndefined();
        expect(state.routeErrors.shortest).toBe('engine unreachable');
    });
});

describe('station selection', () => {
    it('selecting a station resets the infobox until data arrives', () => {
        let state = { ...initialState(), stations: [makeStation()] };
        state = setInfobox(selectStation(state, 'st-1'), null);
        expect(state.selectedStation).toBe('st-1');
        expect(state.infobox).toBeNull();
    });
});

describe('immutability', () => {
    it('transitions never mutate the previous state', () => {
        const state = stateWithRoutes();
        const snapshot = JSON.stringify(state);
        setOrigin(state, C);
        setWeight(state, 0, 1);
        storeRoute(state, 'optimal', makeRouteDocument());
        selectStation(state, 'st-1');
        expect(JSON.stringify(state)).toBe(snapshot);
    });
});
