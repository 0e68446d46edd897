"""Fixed-frame TCP protocol between the verifier and the party servers.

Frames (all sizes fixed; magic ``ESEM``, version 0x01):

    CONSTRUCT request   magic(4) ver(1) op=0x01(1) key_id(16) x(16)   = 38 B
    OK response         magic(4) ver(1) status=0x00(1) point(32)     = 38 B
    error response      magic(4) ver(1) status(1)                    =  6 B
    PROVISION request   magic(4) ver(1) op=0x02(1) len(u32 BE) share file bytes
    PROVISION ack       6-byte response (status only)

Requests carry only (key_id, x): index sets are derived server-side, so the
wire never exposes them.  The scheme assumes secure channels between
verifier and parties; transport encryption is a deployment concern and is
deliberately not layered in here.

The client queries all l parties concurrently and aggregates only complete
response sets; any failure yields :class:`CommitmentUnavailable` with
per-party diagnostics, never a partial aggregate.
"""

from __future__ import annotations

import logging
import os
import socket
import socketserver
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    CommitmentUnavailable,
    DecodeError,
    IntegrityError,
    ParameterError,
    ProtocolError,
)
from .groupmath import GroupElement, OpCounter, POINT_LEN
from .kdf import TAG_LEN, CommitmentTag
from .snodbpv import (
    PartyShare,
    decode_share,
    encode_share,
    snod_party_construct,
    snod_receiver_aggregate,
)

log = logging.getLogger("esem.party")

WIRE_MAGIC = b"ESEM"
WIRE_VERSION = 0x01
OP_CONSTRUCT = 0x01
OP_PROVISION = 0x02
STATUS_OK = 0x00
STATUS_UNKNOWN_KEY = 0x01
STATUS_BAD_REQUEST = 0x02

HEADER_LEN = 6
CONSTRUCT_REQUEST_LEN = HEADER_LEN + TAG_LEN + TAG_LEN  # 38
CONSTRUCT_OK_RESPONSE_LEN = HEADER_LEN + POINT_LEN  # 38
ERROR_RESPONSE_LEN = HEADER_LEN

_PROVISION_LEN_PREFIX = struct.Struct(">I")
_MAX_PROVISION_BYTES = 1 << 26


def encode_construct_request(key_id: bytes, x: CommitmentTag) -> bytes:
    if len(key_id) != TAG_LEN:
        raise ParameterError(f"key id must be {TAG_LEN} bytes")
    return bytes((*WIRE_MAGIC, WIRE_VERSION, OP_CONSTRUCT)) + key_id + x.data


def encode_provision_request(share_bytes: bytes) -> bytes:
    return (
        bytes((*WIRE_MAGIC, WIRE_VERSION, OP_PROVISION))
        + _PROVISION_LEN_PREFIX.pack(len(share_bytes))
        + share_bytes
    )


def encode_response(status: int, point: Optional[bytes] = None) -> bytes:
    frame = bytes((*WIRE_MAGIC, WIRE_VERSION, status))
    if point is not None:
        frame += point
    return frame


@dataclass(frozen=True)
class PartyEndpointSet:
    """The l party endpoints a verifier talks to, in party order."""

    endpoints: Tuple[Tuple[str, int], ...]
    timeout: float = 5.0
    retries: int = 1

    def __post_init__(self) -> None:
        if not self.endpoints:
            raise ParameterError("need at least one endpoint")
        if self.timeout <= 0:
            raise ParameterError("timeout must be positive")
        if self.retries < 0:
            raise ParameterError("retry count must be >= 0")

    @classmethod
    def parse(cls, spec: str, timeout: float = 5.0, retries: int = 1) -> "PartyEndpointSet":
        """Parse ``host:port,host:port,...``."""
        endpoints = []
        for item in spec.split(","):
            host, _, port = item.strip().rpartition(":")
            if not host or not port.isdigit():
                raise ParameterError(f"bad endpoint {item!r}, expected host:port")
            endpoints.append((host, int(port)))
        return cls(tuple(endpoints), timeout=timeout, retries=retries)

    @property
    def party_count(self) -> int:
        return len(self.endpoints)


class ShareStore:
    """Share storage for one party server, optionally directory-backed.

    Entries are keyed by the key id embedded in the share; a server is one
    party, so two shares with equal key id but different party index in the
    same directory are a misconfiguration and are refused.
    """

    def __init__(self, directory: Optional[str] = None) -> None:
        self._directory = directory
        self._shares: Dict[bytes, PartyShare] = {}
        self._lock = threading.Lock()
        if directory is not None:
            self._load_directory(directory)

    def _load_directory(self, directory: str) -> None:
        for name in sorted(os.listdir(directory)):
            if not name.endswith(".share"):
                continue
            share = load_verified_share(os.path.join(directory, name))
            existing = self._shares.get(share.key_id)
            if existing is not None and existing.party_index != share.party_index:
                raise ParameterError(
                    f"conflicting shares for key {share.key_id.hex()} in {directory}"
                )
            self._shares[share.key_id] = share

    def get(self, key_id: bytes) -> Optional[PartyShare]:
        with self._lock:
            return self._shares.get(key_id)

    def put(self, share: PartyShare) -> None:
        """Insert or idempotently overwrite; persists first when backed."""
        if self._directory is not None:
            path = os.path.join(self._directory, share.key_id.hex() + ".share")
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(encode_share(share))
            os.replace(tmp, path)
        with self._lock:
            self._shares[share.key_id] = share

    def __len__(self) -> int:
        with self._lock:
            return len(self._shares)


def load_verified_share(path: str) -> PartyShare:
    """Load a share file, re-verifying its integrity tag and points."""
    with open(path, "rb") as fh:
        return decode_share(fh.read())


class _PartyHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        sock = self.request
        sock.settimeout(self.server.io_timeout)
        while True:
            try:
                header = _recv_exact(sock, HEADER_LEN)
            except _ShortRead as exc:
                if exc.received:
                    _respond(sock, STATUS_BAD_REQUEST)
                return
            except OSError:
                return
            if header[:4] != WIRE_MAGIC or header[4] != WIRE_VERSION:
                _respond(sock, STATUS_BAD_REQUEST)
                return
            opcode = header[5]
            try:
                if opcode == OP_CONSTRUCT:
                    keep_going = self._handle_construct(sock)
                elif opcode == OP_PROVISION:
                    keep_going = self._handle_provision(sock)
                else:
                    _respond(sock, STATUS_BAD_REQUEST)
                    return
            except OSError:
                return
            if not keep_going:
                return

    def _handle_construct(self, sock) -> bool:
        try:
            body = _recv_exact(sock, TAG_LEN + TAG_LEN)
        except _ShortRead:
            _respond(sock, STATUS_BAD_REQUEST)
            return False
        key_id, x_bytes = body[:TAG_LEN], body[TAG_LEN:]
        share = self.server.store.get(key_id)
        if share is None:
            log.info("construct key_id=%s -> unknown key", key_id.hex())
            _respond(sock, STATUS_UNKNOWN_KEY)
            return True
        # Semi-honest servers observe and may record everything they see;
        # that is the threat model, so logging the request is fine.
        point = snod_party_construct(share, CommitmentTag(x_bytes))
        if self.server.response_delay:
            time.sleep(self.server.response_delay)
        log.info(
            "construct key_id=%s x=%s party=%d -> ok",
            key_id.hex(),
            x_bytes.hex(),
            share.party_index,
        )
        _respond(sock, STATUS_OK, point.to_bytes())
        return True

    def _handle_provision(self, sock) -> bool:
        try:
            raw_len = _recv_exact(sock, _PROVISION_LEN_PREFIX.size)
            (length,) = _PROVISION_LEN_PREFIX.unpack(raw_len)
            if length > _MAX_PROVISION_BYTES:
                raise _ShortRead(0)
            payload = _recv_exact(sock, length)
        except _ShortRead:
            _respond(sock, STATUS_BAD_REQUEST)
            return False
        try:
            share = decode_share(payload)
        except (DecodeError, IntegrityError, ParameterError) as exc:
            log.warning("provision rejected: %s", exc)
            _respond(sock, STATUS_BAD_REQUEST)
            return True
        self.server.store.put(share)
        log.info(
            "provisioned key_id=%s party=%d (%d points)",
            share.key_id.hex(),
            share.party_index,
            share.n,
        )
        _respond(sock, STATUS_OK)
        return True


class _ShortRead(Exception):
    def __init__(self, received: int) -> None:
        self.received = received


def _recv_exact(sock, count: int) -> bytes:
    chunks = []
    received = 0
    while received < count:
        chunk = sock.recv(count - received)
        if not chunk:
            raise _ShortRead(received)
        chunks.append(chunk)
        received += len(chunk)
    return b"".join(chunks)


def _respond(sock, status: int, point: Optional[bytes] = None) -> None:
    try:
        sock.sendall(encode_response(status, point))
    except OSError:
        pass


class PartyServer(socketserver.ThreadingTCPServer):
    """One party's server; handles many concurrent connections."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        store: ShareStore,
        address: Tuple[str, int] = ("127.0.0.1", 0),
        io_timeout: float = 10.0,
        response_delay: float = 0.0,
    ) -> None:
        self.store = store
        self.io_timeout = io_timeout
        self.response_delay = response_delay  # test/simulation knob
        super().__init__(address, _PartyHandler)

    @property
    def address(self) -> Tuple[str, int]:
        return self.server_address[:2]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_party(store: ShareStore, address: Tuple[str, int]) -> None:
    """Blocking convenience wrapper used by the CLI."""
    with PartyServer(store, address) as server:
        log.info("party server listening on %s:%d (%d shares)", *server.address, len(store))
        server.serve_forever()


# ── verifier-side client ─────────────────────────────────────────────────


def _query_party(
    endpoint: Tuple[str, int], payload: bytes, timeout: float, retries: int
) -> bytes:
    last: Exception = ProtocolError("not attempted")
    for _ in range(retries + 1):
        try:
            with socket.create_connection(endpoint, timeout=timeout) as sock:
                sock.settimeout(timeout)
                sock.sendall(payload)
                header = _recv_exact(sock, HEADER_LEN)
                if header[:4] != WIRE_MAGIC or header[4] != WIRE_VERSION:
                    raise ProtocolError("bad response header")
                status = header[5]
                if status == STATUS_UNKNOWN_KEY:
                    raise ProtocolError("party does not know this key id")
                if status != STATUS_OK:
                    raise ProtocolError(f"party returned status {status:#x}")
                return _recv_exact(sock, POINT_LEN)
        except (_ShortRead, OSError, ProtocolError) as exc:
            last = exc if not isinstance(exc, _ShortRead) else ProtocolError("truncated response")
    raise last


def fetch_commitment(
    endpoints: PartyEndpointSet,
    key_id: bytes,
    x: CommitmentTag,
    ops: Optional[OpCounter] = None,
) -> GroupElement:
    """Query all l parties concurrently and aggregate their responses.

    All-or-nothing: raises :class:`CommitmentUnavailable` carrying per-party
    diagnostics if any party fails, times out, or answers with an invalid
    point.  Total latency tracks the slowest party, not the sum.
    """
    payload = encode_construct_request(key_id, x)
    points: List[Optional[GroupElement]] = [None] * endpoints.party_count
    failures: Dict[int, str] = {}

    def one(index: int) -> None:
        try:
            raw = _query_party(
                endpoints.endpoints[index], payload, endpoints.timeout, endpoints.retries
            )
            points[index] = GroupElement.from_bytes(raw)
        except (ProtocolError, DecodeError, OSError) as exc:
            failures[index + 1] = str(exc)

    with ThreadPoolExecutor(max_workers=endpoints.party_count) as pool:
        list(pool.map(one, range(endpoints.party_count)))

    if failures:
        raise CommitmentUnavailable(
            f"{len(failures)} of {endpoints.party_count} parties unavailable", failures
        )
    return snod_receiver_aggregate(points, endpoints.party_count, ops)


class RemoteParties:
    """Commitment source over the network client (plugs into verify)."""

    def __init__(self, endpoints: PartyEndpointSet) -> None:
        self.endpoints = endpoints

    def obtain(
        self, kid: bytes, x: CommitmentTag, ops: Optional[OpCounter] = None
    ) -> GroupElement:
        return fetch_commitment(self.endpoints, kid, x, ops)


def provision(shares: Sequence[PartyShare], endpoints: PartyEndpointSet) -> List[int]:
    """Upload one share per endpoint (aligned by position); returns statuses.

    Raises :class:`ProtocolError` if any server rejects its share (integrity
    failures surface as BAD_REQUEST).
    """
    if len(shares) != endpoints.party_count:
        raise ParameterError("need exactly one share per endpoint")
    statuses: List[int] = []
    for share, endpoint in zip(shares, endpoints.endpoints):
        payload = encode_provision_request(encode_share(share))
        try:
            with socket.create_connection(endpoint, timeout=endpoints.timeout) as sock:
                sock.settimeout(endpoints.timeout)
                sock.sendall(payload)
                header = _recv_exact(sock, HEADER_LEN)
        except (_ShortRead, OSError) as exc:
            raise ProtocolError(f"provision to {endpoint} failed: {exc}") from exc
        if header[:4] != WIRE_MAGIC or header[4] != WIRE_VERSION:
            raise ProtocolError("bad provision ack header")
        status = header[5]
        if status != STATUS_OK:
            raise ProtocolError(f"party {endpoint} rejected share (status {status:#x})")
        statuses.append(status)
    return statuses
