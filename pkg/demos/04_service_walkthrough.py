#!/usr/bin/env python3
"""Walk the HTTP session API end to end, including crash recovery.

Runs the FastAPI app in-process (no network), creates a session, plays a
few proposed tones against a simulated listener, then "restarts" the
service and shows that event-log replay rebuilds the identical estimate.
For a real deployment: `python -m audiogp.service` with AUDIOGP_HOST /
AUDIOGP_PORT / AUDIOGP_DATA_DIR.
"""

import tempfile

from fastapi.testclient import TestClient

import audiogp as a
from audiogp.service import create_app


def main():
    truth = a.TrueThreshold.flat(30.0)
    listener = a.SimulatedListener(truth, sigma_p=2.0, seed=11)

    with tempfile.TemporaryDirectory() as data_dir:
        with TestClient(create_app(data_dir)) as client:
            resp = client.post("/sessions", json={
                "sigma_p": 2.0,
                "max_trials": 12,
                "mean": {"slope": 0.0, "intercept": 35.0},
            })
            session_id = resp.json()["id"]
            print(f"created session {session_id} -> {resp.status_code}")

            for _ in range(6):
                stim = client.get(f"/sessions/{session_id}/next-trial").json()
                label = listener.respond(a.Stimulus(**stim))
                out = client.post(f"/sessions/{session_id}/responses",
                                  json={**stim, "label": label}).json()
                print(f"  {stim['frequency_hz']:7.0f} Hz @ {stim['level_dbhl']:5.1f} dB"
                      f" -> {label:+d}   (n={out['n_trials']}, "
                      f"max_std={out['max_std']:.2f}, {out['status']})")

            before = client.get(f"/sessions/{session_id}/estimate",
                                params={"points": 16}).json()

        print("\nservice 'crashed'; starting a fresh instance on the same data dir")
        with TestClient(create_app(data_dir)) as revived:
            after = revived.get(f"/sessions/{session_id}/estimate",
                                params={"points": 16}).json()
            print("estimate identical after replay:", after == before)
            nxt = revived.get(f"/sessions/{session_id}/next-trial").json()
            print(f"ready to continue at {nxt['frequency_hz']:.0f} Hz / "
                  f"{nxt['level_dbhl']:.1f} dB")


if __name__ == "__main__":
    main()
