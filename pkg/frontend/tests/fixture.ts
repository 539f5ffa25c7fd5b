// Writes a complete engine data directory for integration tests: a 3x4 road
// grid, two live stations on the middle row, one silent station, a crime
// cluster planted on the middle bike corridor, and constant-count snapshots so
// predictions reduce to persistence. The middle corridor is the shortest ride
// between the stations; the crime cluster pushes safety-weighted routes onto a
// detour row, so the scheme overlays genuinely differ.

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

const BASE_LAT = 40.73;
const BASE_LON = -73.99;
const LAT_STEP = 0.0008; // about 89 m between rows
const LON_STEP = 0.003;  // about 253 m between columns at this latitude
const ROWS = 3;
const COLS = 4;

export interface FixtureInfo {
    dir: string;
    configPath: string;
    originClick: { lat: number; lon: number };
    destinationClick: { lat: number; lon: number };
    west: string;
    east: string;
    ghost: string;
    expectedHistoryPoints: number;
    defaultHorizon: number;
}

function nodeAt(row: number, col: number): { lat: number; lon: number } {
    return { lat: BASE_LAT + LAT_STEP * row, lon: BASE_LON + LON_STEP * col };
}

function roadsGeojson(): string {
    const features: object[] = [];
    let index = 0;
    const edge = (a: { lat: number; lon: number }, b: { lat: number; lon: number }) => {
        features.push({
            type: 'Feature',
            geometry: {
                type: 'LineString',
                coordinates: [[a.lon, a.lat], [b.lon, b.lat]],
            },
            properties: { edge_id: `e${index++}` },
        });
    };
    for (let r = 0; r < ROWS; r++) {
        for (let c = 0; c < COLS - 1; c++) edge(nodeAt(r, c), nodeAt(r, c + 1));
    }
    for (let c = 0; c < COLS; c++) {
        for (let r = 0; r < ROWS - 1; r++) edge(nodeAt(r, c), nodeAt(r + 1, c));
    }
    return JSON.stringify({ type: 'FeatureCollection', features });
}

function stationsJson(): string {
    const west = nodeAt(1, 0);
    const east = nodeAt(1, 3);
    const ghost = nodeAt(2, 0);
    return JSON.stringify({
        stations: [
            { station_id: 'st-west', name: 'West Dock', lat: west.lat, lon: west.lon, capacity: 16 },
            { station_id: 'st-east', name: 'East Dock', lat: east.lat, lon: east.lon, capacity: 20 },
            { station_id: 'st-ghost', name: 'Quiet Corner', lat: ghost.lat, lon: ghost.lon, capacity: 7 },
        ],
    });
}

function crimeCsv(): string {
    // 40 incidents strictly inside the middle span of the (1,1)-(1,2) edge,
    // far enough from its endpoints that no other edge's 50 m buffer sees them.
    const a = nodeAt(1, 1);
    const b = nodeAt(1, 2);
    const lines = ['id,latitude,longitude,date,category'];
    for (let i = 0; i < 40; i++) {
        const t = 0.35 + (0.3 * i) / 39;
        const lat = a.lat + (b.lat - a.lat) * t;
        const lon = a.lon + (b.lon - a.lon) * t;
        lines.push(`c${i},${lat},${lon},2017-05-0${1 + (i % 9)},assault`);
    }
    return lines.join('\n') + '\n';
}

// Tuesday 2017-05-23 10:00 in New York is 14:00 UTC (EDT).
const SNAPSHOT_EPOCHS = [
    Date.UTC(2017, 4, 22, 9) / 1000,   // Monday 05:00 local, outside the 24h window
    Date.UTC(2017, 4, 22, 19) / 1000,  // Monday 15:00 local
    Date.UTC(2017, 4, 23, 12) / 1000,  // Tuesday 08:00 local
    Date.UTC(2017, 4, 23, 13) / 1000,  // Tuesday 09:00 local
    Date.UTC(2017, 4, 23, 14) / 1000,  // Tuesday 10:00 local, the pinned now
];

function snapshotJson(epoch: number): string {
    return JSON.stringify({
        last_updated: epoch,
        stations: [
            { station_id: 'st-west', num_bikes_available: 8, num_docks_available: 4 },
            { station_id: 'st-east', num_bikes_available: 5, num_docks_available: 15 },
        ],
    });
}

export function writeFixture(dir: string, port: number): FixtureInfo {
    mkdirSync(join(dir, 'status'), { recursive: true });
    writeFileSync(join(dir, 'roads.geojson'), roadsGeojson());
    writeFileSync(join(dir, 'stations.json'), stationsJson());
    writeFileSync(join(dir, 'crime.csv'), crimeCsv());
    SNAPSHOT_EPOCHS.forEach((epoch, i) => {
        writeFileSync(join(dir, 'status', `snap-${i}.json`), snapshotJson(epoch));
    });
    const config = [
        'station_info_path = stations.json',
        'crime_csv_path = crime.csv',
        'road_geojson_path = roads.geojson',
        'status_dir = status',
        'store_path = store.txt',
        'timezone = America/New_York',
        'now = 2017-05-23T10:00:00',
        'station_buffer_k = 300',
        'crime_buffer_d = 50',
        'max_candidate_stations = 5',
        'listen_host = 127.0.0.1',
        `listen_port = ${port}`,
        '',
    ].join('\n');
    const configPath = join(dir, 'engine.conf');
    writeFileSync(configPath, config);
    return {
        dir,
        configPath,
        originClick: nodeAt(0, 0),
        destinationClick: nodeAt(2, 3),
        west: 'st-west',
        east: 'st-east',
        ghost: 'st-ghost',
        expectedHistoryPoints: 4,
        defaultHorizon: 6,
    };
}
