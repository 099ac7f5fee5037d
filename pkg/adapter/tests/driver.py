"""Line-level subprocess driver for adapter tests."""

import json
import queue
import subprocess
import sys
import threading


class AdapterProcess:
    def __init__(self, args, env=None):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "evaluator_adapter.cli", *args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
            env=env,
        )
        self._lines: queue.Queue = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self):
        for line in self.proc.stdout:
            if line.strip():
                self._lines.put(line.strip())
        self._lines.put(None)

    def send(self, message: dict):
        self.proc.stdin.write(json.dumps(message) + "\n")
        self.proc.stdin.flush()

    def send_raw(self, text: str):
        self.proc.stdin.write(text + "\n")
        self.proc.stdin.flush()

    def read(self, timeout=20.0) -> dict:
        line = self._lines.get(timeout=timeout)
        if line is None:
            raise ConnectionError("adapter closed stdout")
        return json.loads(line)

    def request(self, message: dict, timeout=20.0) -> dict:
        self.send(message)
        return self.read(timeout)

    def shutdown(self) -> int:
        try:
            self.send({"type": "shutdown"})
            self.proc.stdin.close()
        except Exception:
            pass
        return self.proc.wait(timeout=20)

    def kill(self):
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()
