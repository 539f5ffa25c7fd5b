// Browser entry point: builds the controller against the configured API base
// (same-origin /api by default, override with ?api=http://host:port) and keeps
// the DOM in sync with every state change.

import { ApiClient, type Scheme } from './api';
import { renderChartSvg } from './chart';
import { Controller } from './controller';
import { PlannerMap } from './map';
import { overlayFromDocument, SCHEME_COLORS } from './overlays';
import type { UiState } from './state';
import { displayParts, SCALE } from './weights';

const SCHEMES: readonly Scheme[] = ['shortest', 'safest', 'optimal'];

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get('api') ?? '/api');

const sliders = [0, 1, 2].map(
    (i) => document.getElementById(`weight-${i}`) as HTMLInputElement,
);
const sliderLabels = [0, 1, 2].map(
    (i) => document.getElementById(`weight-${i}-label`) as HTMLSpanElement,
);
const banner = document.getElementById('banner') as HTMLDivElement;
const routePanel = document.getElementById('routes') as HTMLDivElement;
const infobox = document.getElementById('infobox') as HTMLDivElement;
const hint = document.getElementById('hint') as HTMLDivElement;

function escapeHtml(text: string): string {
    return text
        .replaceAll('&', '&amp;')
        .replaceAll('<', '&lt;')
        .replaceAll('>', '&gt;')
        .replaceAll('"', '&quot;');
}

function routeRow(state: UiState, scheme: Scheme): string {
    const swatch = `<span class="swatch" style="background:${SCHEME_COLORS[scheme]}"></span>`;
    const error = state.routeErrors[scheme];
    if (error !== undefined) {
        return `<div class="route-row">${swatch}<b>${scheme}</b>: <span class="route-error">${escapeHtml(error)}</span></div>`;
    }
    const doc = state.routes[scheme];
    if (doc === undefined) return `<div class="route-row">${swatch}<b>${scheme}</b>: &mdash;</div>`;
    const c = doc.chosen;
    const stats = [
        `${Math.round(c.total_length_m)} m`,
        `crime ${c.total_crime}`,
        `avl ${c.avl.toFixed(1)}`,
        `score ${c.score.toFixed(3)}`,
    ].join(' &middot; ');
    return `<div class="route-row">${swatch}<b>${scheme}</b> ${escapeHtml(c.origin_station_id)} &rarr; ${escapeHtml(c.destination_station_id)}: ${stats}</div>`;
}

function renderInfobox(state: UiState): void {
    if (state.infobox === null) {
        infobox.innerHTML = state.selectedStation === null
            ? '<p class="muted">click a station marker for details</p>'
            : '<p class="muted">loading&hellip;</p>';
        return;
    }
    const model = state.infobox;
    const headline = model.headline === null
        ? '<p class="muted">status unknown</p>'
        : `<p class="headline">${model.headline.bikes} bikes &middot; ${model.headline.docks} docks</p>`;
    infobox.innerHTML = `<h3>${escapeHtml(model.name)}</h3>${headline}${renderChartSvg(model)}`;
}

function render(state: UiState): void {
    plannerMap.renderStations(state.stations);
    plannerMap.renderEndpoints(state.origin, state.destination);
    plannerMap.renderOverlays(
        SCHEMES.flatMap((s) => (state.routes[s] ? [overlayFromDocument(state.routes[s]!)] : [])),
    );
    const labels = displayParts(state.weights);
    for (const i of [0, 1, 2]) {
        sliders[i].value = String(state.weights[i] / SCALE);
        sliderLabels[i].textContent = labels[i];
    }
    banner.hidden = state.banner === null;
    banner.textContent = state.banner ?? '';
    routePanel.innerHTML = SCHEMES.map((s) => routeRow(state, s)).join('');
    renderInfobox(state);
    hint.textContent = state.origin === null
        ? 'click the map to set the origin'
        : state.destination === null
            ? 'click again to set the destination'
            : 'click again to start a new trip';
}

const controller = new Controller(api, render);
const plannerMap = new PlannerMap('map', {
    onMapClick: (point) => void controller.clickMap(point),
    onStationClick: (id) => void controller.selectStation(id),
});

sliders.forEach((slider, i) => {
    slider.addEventListener('input', () => {
        void controller.moveSlider(i as 0 | 1 | 2, Number(slider.value));
    });
});

render(controller.state);
void controller.refreshStations();
