#!/usr/bin/env python3
"""Plugin predicate: exit 0 (true) when the frame payload is almost black."""
import base64
import json
import sys

event = json.load(sys.stdin)
payload = base64.b64decode(event.get("payload", ""))
mean = sum(payload) / len(payload) if payload else 0.0
sys.exit(0 if mean < 8 else 1)
