"""Command line front end: ingest, serve, and offline route/predict queries."""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import sys
from zoneinfo import ZoneInfo

from fastapi import HTTPException

from .geo import GeoPoint
from .model import FactorWeights
from .predict import DEFAULT_HORIZON
from .service import (
    EngineError,
    load_config,
    load_engine,
    prediction_document,
    run_ingest,
    run_route_query,
    serve,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safebike",
        description="Availability-aware walk-bike-walk route recommendations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="parse inputs, save the snapshot store")
    ingest.add_argument("--config", required=True, help="engine config file")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--config", required=True)
    srv.add_argument("--host", help="override listen_host")
    srv.add_argument("--port", type=int, help="override listen_port")

    rt = sub.add_parser("route", help="run one route query offline")
    rt.add_argument("--config", required=True)
    rt.add_argument("--from-lat", type=float, required=True, dest="from_lat")
    rt.add_argument("--from-lon", type=float, required=True, dest="from_lon")
    rt.add_argument("--to-lat", type=float, required=True, dest="to_lat")
    rt.add_argument("--to-lon", type=float, required=True, dest="to_lon")
    rt.add_argument("--scheme", default="optimal",
                    choices=("shortest", "safest", "optimal"))
    rt.add_argument("--alpha", type=float, default=0.3)
    rt.add_argument("--beta", type=float, default=0.3)
    rt.add_argument("--gamma", type=float, default=0.4)
    rt.add_argument("--departure", help="ISO timestamp (default: configured now)")

    pred = sub.add_parser("predict", help="print a station's availability forecast")
    pred.add_argument("--config", required=True)
    pred.add_argument("--station", required=True)
    pred.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    return parser


def _cmd_ingest(args) -> int:
    for line in run_ingest(load_config(args.config)):
        print(line)
    return 0


def _cmd_serve(args) -> int:
    config = load_config(args.config)
    if args.host is not None:
        config = dataclasses.replace(config, listen_host=args.host)
    if args.port is not None:
        config = dataclasses.replace(config, listen_port=args.port)
    serve(config)
    return 0


def _cmd_route(args) -> int:
    state = load_engine(load_config(args.config))
    try:
        weights = FactorWeights.normalized(args.alpha, args.beta, args.gamma)
    except ValueError as exc:
        print(f"error: invalid weights: {exc}", file=sys.stderr)
        return 1
    departure = None
    if args.departure is not None:
        departure = dt.datetime.fromisoformat(args.departure)
        if departure.tzinfo is None:
            departure = departure.replace(tzinfo=ZoneInfo(state.config.timezone))
    document = run_route_query(
        state,
        GeoPoint(args.from_lat, args.from_lon),
        GeoPoint(args.to_lat, args.to_lon),
        departure,
        args.scheme,
        weights,
    )
    print(json.dumps(document, indent=2))
    return 0


def _cmd_predict(args) -> int:
    state = load_engine(load_config(args.config))
    if args.station not in state.registry:
        print(f"error: unknown station: {args.station}", file=sys.stderr)
        return 1
    if args.horizon < 1:
        print("error: horizon must be >= 1", file=sys.stderr)
        return 1
    if args.station not in state.statuses:
        print(f"error: station {args.station} has no current status", file=sys.stderr)
        return 1
    print(json.dumps(prediction_document(state, args.station, args.horizon), indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "ingest": _cmd_ingest,
        "serve": _cmd_serve,
        "route": _cmd_route,
        "predict": _cmd_predict,
    }
    try:
        return handlers[args.command](args)
    except HTTPException as exc:
        detail = exc.detail if isinstance(exc.detail, str) else json.dumps(exc.detail)
        print(f"error: {detail}", file=sys.stderr)
        return 1
    except (EngineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
