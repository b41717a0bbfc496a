"""Drive the live service over HTTP: start, steer, stream, reset.

Run: python3 demos/demo_live_service.py
"""

import json
import threading
import time
import urllib.request

from harmonicflow import service

httpd, svc = service.make_server(port=0)
port = httpd.server_address[1]
threading.Thread(target=httpd.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print(f"service on {base}")


def post(payload):
    req = urllib.request.Request(
        base + "/control", data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
    )
    return json.loads(urllib.request.urlopen(req, timeout=20).read())


config = {
    "genus": 2,
    "domain_lengths": [2, 2, 0.5],
    "domain_twists": [-1.5, 2, 0.5],
    "target_lengths": [2, 2, 1.5],
    "target_twists": [-1.5, 2, 0.5],
    "depth": 1,
    "method": "karcher-com",
    "tolerance": 1e-8,
    "max_iterations": 2000,
    "snapshot_stride": 25,
}
print("start:", post({"action": "start", "config": config}))

time.sleep(2.0)
print("switch to cosh-com mid-run:", post({"action": "set_method", "method": "cosh-com"}))

print("\nstreaming the first records:")
resp = urllib.request.urlopen(base + "/stream", timeout=20)
seen = 0
while seen < 6:
    line = resp.readline().decode()
    if line.startswith("data: "):
        rec = json.loads(line[6:])
        print(f"  it {rec['iteration']:>5}  E {rec['energy']:.8f}  "
              f"tau {rec['tension_norm']:.2e}  method {rec['method']}")
        seen += 1
resp.close()

geom = json.loads(urllib.request.urlopen(base + "/geometry", timeout=20).read())
print(f"\ngeometry payload: {len(geom['triangles'])} triangles, "
      f"{len(geom['vertices'])} vertex orbits, genus {geom['genus']}")

print("reset:", post({"action": "reset"}))
httpd.shutdown()
