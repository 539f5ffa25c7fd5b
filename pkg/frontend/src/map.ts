// Leaflet bindings. Everything here renders state produced elsewhere; no
// fetches, no route math. Expects the Leaflet script to be loaded globally
// before this module runs.

import type * as Leaflet from 'leaflet';
import type { StationRecord } from './api';
import { markerColor, stationRatio } from './color';
import type { RouteOverlay } from './overlays';
import type { MapPoint } from './state';

declare const L: typeof Leaflet;

export interface MapHandlers {
    onMapClick(point: MapPoint): void;
    onStationClick(stationId: string): void;
}

function escapeHtml(text: string): string {
    return text
        .replaceAll('&', '&amp;')
        .replaceAll('<', '&lt;')
        .replaceAll('>', '&gt;')
        .replaceAll('"', '&quot;');
}

function stationTooltip(s: StationRecord): string {
    const name = `${escapeHtml(s.name)} (${escapeHtml(s.station_id)})`;
    if (s.status !== 'known') return `${name}: status unknown`;
    return `${name}: ${s.bikes} bikes / ${s.docks} docks`;
}

export class PlannerMap {
    private map: Leaflet.Map;
    private stationLayer: Leaflet.LayerGroup;
    private overlayLayer: Leaflet.LayerGroup;
    private endpointLayer: Leaflet.LayerGroup;
    private fitted = false;

    constructor(elementId: string, private handlers: MapHandlers) {
        this.map = L.map(elementId).setView([40.73, -73.99], 15);
        L.tileLayer('https://tile.openstreetmap.org/{z}/{x}/{y}.png', {
            maxZoom: 19,
            attribution: '&copy; OpenStreetMap contributors',
        }).addTo(this.map);
        this.overlayLayer = L.layerGroup().addTo(this.map);
        this.stationLayer = L.layerGroup().addTo(this.map);
        this.endpointLayer = L.layerGroup().addTo(this.map);
        this.map.on('click', (event: Leaflet.LeafletMouseEvent) => {
            this.handlers.onMapClick({ lat: event.latlng.lat, lon: event.latlng.lng });
        });
    }

    renderStations(stations: StationRecord[]): void {
        this.stationLayer.clearLayers();
        for (const s of stations) {
            const marker = L.circleMarker([s.lat, s.lon], {
                radius: 9,
                color: '#22303c',
                weight: 1,
                fillColor: markerColor(stationRatio(s)),
                fillOpacity: 0.92,
            });
            marker.bindTooltip(stationTooltip(s));
            marker.on('click', (event) => {
                L.DomEvent.stopPropagation(event);
                this.handlers.onStationClick(s.station_id);
            });
            marker.addTo(this.stationLayer);
        }
        if (!this.fitted && stations.length > 0) {
            this.map.fitBounds(L.latLngBounds(stations.map((s) => [s.lat, s.lon])).pad(0.3));
            this.fitted = true;
        }
    }

    renderOverlays(overlays: RouteOverlay[]): void {
        this.overlayLayer.clearLayers();
        for (const overlay of overlays) {
            for (const leg of overlay.legs) {
                L.polyline(leg.latlngs, {
                    color: overlay.color,
                    weight: overlay.scheme === 'optimal' ? 5 : 3,
                    opacity: 0.85,
                    dashArray: leg.mode === 'walk' ? '4 6' : undefined,
                }).addTo(this.overlayLayer);
            }
            for (const m of overlay.markers) {
                const marker = L.circleMarker([m.lat, m.lon], {
                    radius: 6,
                    color: overlay.color,
                    weight: 2,
                    fillColor: '#ffffff',
                    fillOpacity: 1,
                });
                marker.bindTooltip(`${escapeHtml(m.label)} [${overlay.scheme}]`);
                marker.addTo(this.overlayLayer);
            }
        }
    }

    renderEndpoints(origin: MapPoint | null, destination: MapPoint | null): void {
        this.endpointLayer.clearLayers();
        const place = (point: MapPoint, label: string) => {
            L.marker([point.lat, point.lon], {
                icon: L.divIcon({ className: 'endpoint-pin', html: label, iconSize: [22, 22] }),
            }).addTo(this.endpointLayer);
        };
        if (origin !== null) place(origin, 'A');
        if (destination !== null) place(destination, 'B');
    }
}
