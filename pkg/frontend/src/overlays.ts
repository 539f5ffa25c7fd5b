// Route documents become map overlays: one polyline per leg plus the two
// station markers annotated with the predicted counts at check-out/check-in.

import type { LegFeature, RouteDocument, RouteFeature, Scheme, StationFeature } from './api';

export const SCHEME_COLORS: Record<Scheme, string> = {
    shortest: '#d62728',
    safest: '#2ca02c',
    optimal: '#1f77b4',
};

export interface OverlayLeg {
    mode: 'walk' | 'bike';
    latlngs: [number, number][];
}

export interface OverlayMarker {
    role: 'origin' | 'destination';
    stationId: string;
    name: string;
    lat: number;
    lon: number;
    label: string;
    at: string;
}

export interface RouteOverlay {
    scheme: Scheme;
    color: string;
    legs: OverlayLeg[];
    markers: OverlayMarker[];
}

export function markerLabel(feature: StationFeature): string {
    const props = feature.properties;
    const time = props.at.slice(11, 16);
    if (props.role === 'origin') {
        return `${props.name}: PB ${formatCount(props.predicted_bikes)} at ${time} UTC`;
    }
    return `${props.name}: PD ${formatCount(props.predicted_docks)} at ${time} UTC`;
}

function formatCount(value: number | undefined): string {
    if (value === undefined) return '?';
    return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

function isLeg(feature: RouteFeature): feature is LegFeature {
    return feature.properties.kind === 'leg';
}

export function overlayFromDocument(doc: RouteDocument): RouteOverlay {
    const legs: OverlayLeg[] = [];
    const markers: OverlayMarker[] = [];
    for (const feature of doc.chosen.geometry.features) {
        if (isLeg(feature)) {
            legs.push({
                mode: feature.properties.mode,
                latlngs: feature.geometry.coordinates.map(([lon, lat]) => [lat, lon]),
            });
        } else {
            const [lon, lat] = feature.geometry.coordinates;
            markers.push({
                role: feature.properties.role,
                stationId: feature.properties.station_id,
                name: feature.properties.name,
                lat,
                lon,
                label: markerLabel(feature),
                at: feature.properties.at,
            });
        }
    }
    return { scheme: doc.scheme, color: SCHEME_COLORS[doc.scheme], legs, markers };
}

/**
 * Canonical byte serialization of the overlay's drawn geometry (leg coordinate
 * arrays only), for exact comparison between schemes.
 */
export function overlayGeometryBytes(overlay: RouteOverlay): Uint8Array {
    const shape = overlay.legs.map((leg) => leg.latlngs);
    return new TextEncoder().encode(JSON.stringify(shape));
}

export function sameGeometry(a: RouteOverlay, b: RouteOverlay): boolean {
    const ba = overlayGeometryBytes(a);
    const bb = overlayGeometryBytes(b);
    if (ba.length !== bb.length) return false;
    for (let i = 0; i < ba.length; i++) {
        if (ba[i] !== bb[i]) return false;
    }
    return true;
}
