#!/usr/bin/env python3
"""Exercise the HTTP surface end to end without opening a port, using the
in-process test client: ingest, browse, debug query, tag edit with probe,
and the audit log. The curation UI in frontend/ speaks exactly this API."""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from pathrag.generation import NullCompletionClient
from pathrag.pipeline import Engine
from pathrag.server import create_app

DATA = Path(__file__).parent / "data" / "profiles"

engine = Engine(llm=NullCompletionClient())
client = TestClient(create_app(engine))

resp = client.post("/v1/ingest", json={"corpus_path": str(DATA)})
print(f"POST /v1/ingest -> {resp.status_code}, "
      f"{resp.json()['chunk_count']} chunks")

print(f"GET /v1/health -> {client.get('/v1/health').json()}")

docs = client.get("/v1/docs").json()["documents"]
print(f"GET /v1/docs -> {[d['doc_id'] for d in docs]}")

resp = client.post("/v1/query", json={
    "question": "geothermal capacity commissioned in 2023",
    "k": 3, "debug": True})
trace = resp.json()["trace"]
print(f"\nPOST /v1/query (debug) -> {resp.status_code}")
for fused in trace["stages"][0]["fused"]:
    print(f"  fused S={fused['score']:.6f} {fused['chunk_id']}")

probe = "floating solar pilot"
resp = client.post("/v1/docs/novara-energy/tags",
                   json={"tag": probe, "probe_query": probe,
                         "actor": "demo"})
body = resp.json()
print(f"\nPOST /v1/docs/novara-energy/tags -> {resp.status_code}")
print(f"  before: {json.dumps(body['probe']['before'])}")
print(f"  after:  {json.dumps(body['probe']['after'])}")

records = client.get("/v1/editlog").json()["records"]
print(f"\nGET /v1/editlog -> {len(records)} records "
      f"(last action: {records[-1]['action']})")
