"""Scriptable stand-in for a trainer worker, used to exercise the wire
protocol. The single argument picks a behavior:

  ok           handshake, then answer every evaluate with a fixed accuracy
  id-mismatch  answers with id+1
  error        answers {"status":"error","message":"OOM"}
  garbage      answers with a non-JSON line
  silent       handshakes, then never answers
  bad-hello    wrong protocol number in the handshake
  die          exits immediately after the handshake request arrives
"""

import json
import sys
import time


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    line = sys.stdin.readline()
    hello = json.loads(line)
    assert hello.get("type") == "hello"
    if mode == "die":
        return
    if mode == "bad-hello":
        print(json.dumps({"type": "hello", "protocol": 99}), flush=True)
        return
    print(json.dumps({"type": "hello", "protocol": 1}), flush=True)

    for line in sys.stdin:
        request = json.loads(line)
        if request.get("type") == "shutdown":
            return
        req_id = request["id"]
        if mode == "silent":
            time.sleep(60)
            return
        if mode == "garbage":
            print("this is not json", flush=True)
            continue
        if mode == "error":
            print(json.dumps({"id": req_id, "status": "error", "message": "OOM"}),
                  flush=True)
            continue
        if mode == "id-mismatch":
            print(json.dumps({"id": req_id + 1, "status": "ok", "val_acc": 50.0,
                              "params": 1, "wall_time": 0.0}), flush=True)
            continue
        # mode == "ok": echo something derived from the request
        arch = request["arch"]
        print(json.dumps({
            "id": req_id,
            "status": "ok",
            "val_acc": 10.0 + arch["depth"] + request["epochs"],
            "params": arch["depth"] * 100,
            "wall_time": 0.01,
        }), flush=True)


if __name__ == "__main__":
    main()
