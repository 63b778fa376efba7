"""Transports carrying framed ClientUpdates from clients to the server.

Both transports deliver complete validated payloads in arrival order; a bad
frame surfaces from :meth:`recv` as a :class:`TransportError` and never as a
partial update.
"""

import queue
import socket
import threading

from ..errors import TransportError
from .wire import decode_frame, read_frame


class InProcessTransport:
    def __init__(self):
        self._queue = queue.Queue()
        self.sent_frames = []
        self._lock = threading.Lock()

    def send(self, frame):
        frame = bytes(frame)
        with self._lock:
            self.sent_frames.append(frame)
        try:
            self._queue.put(decode_frame(frame))
        except TransportError as exc:
            self._queue.put(exc)

    def recv(self, timeout=None):
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise TransportError(f"no frame within {timeout} s") from None
        if isinstance(item, Exception):
            raise item
        return item

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class LoopbackSocketTransport:
    """TCP on 127.0.0.1. Each :meth:`send` uses its own short-lived connection."""

    def __init__(self, host="127.0.0.1"):
        self._queue = queue.Queue()
        self.sent_frames = []
        self._lock = threading.Lock()
        self._server = socket.create_server((host, 0))
        self._server.settimeout(0.2)
        self.address = self._server.getsockname()
        self._closed = threading.Event()
        self._handlers = []
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True)
        self._acceptor.start()

    def _accept_loop(self):
        while not self._closed.is_set():
            try:
                conn, _ = self._server.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._serve, args=(conn,), daemon=True)
            t.start()
            self._handlers.append(t)

    def _serve(self, conn):
        with conn:
            conn.settimeout(5.0)
            try:
                while True:
                    payload = read_frame(conn.recv)
                    if payload is None:
                        return
                    self._queue.put(payload)
            except TransportError as exc:
                self._queue.put(exc)
            except OSError as exc:
                self._queue.put(TransportError(f"socket error: {exc}"))

    def send(self, frame):
        frame = bytes(frame)
        with self._lock:
            self.sent_frames.append(frame)
        with socket.create_connection(self.address, timeout=5.0) as s:
            s.sendall(frame)

    def recv(self, timeout=None):
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise TransportError(f"no frame within {timeout} s") from None
        if isinstance(item, Exception):
            raise item
        return item

    def close(self):
        self._closed.set()
        self._server.close()
        self._acceptor.join(timeout=2.0)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
