"""Content-addressed blob storage.

Objects are keyed by the hex SHA-256 of their bytes, which gives dedup and
integrity verification for free. Reference counts live in the relational
store (transactional with document lifecycle); the object backend only ever
sees put/get/delete by digest.

Backends: local filesystem (layout ``<root>/<first 2 hex>/<digest>``) and an
S3-compatible HTTP API (path-style URLs, AWS Signature V4).
"""

from __future__ import annotations

import datetime
import hashlib
import hmac
import urllib.parse
from pathlib import Path
from typing import Protocol

import requests
from sqlalchemy.orm import Session

from .db import BlobRecord, Store
from .errors import BackendUnavailable, BlobNotFound, IntegrityError


def sha256_hex(content: bytes) -> str:
    return hashlib.sha256(content).hexdigest()


class BlobRef:
    """Content address plus size and media type."""

    __slots__ = ("digest", "size", "media_type")

    def __init__(self, digest: str, size: int, media_type: str):
        self.digest = digest
        self.size = size
        self.media_type = media_type

    def __eq__(self, other) -> bool:
        return isinstance(other, BlobRef) and self.digest == other.digest

    def __hash__(self) -> int:
        return hash(self.digest)

    def __repr__(self) -> str:
        return f"BlobRef({self.digest[:12]}…, size={self.size}, media_type={self.media_type!r})"


class ObjectBackend(Protocol):
    def put_object(self, key: str, data: bytes) -> None: ...

    def get_object(self, key: str) -> bytes | None:
        """Bytes for the key, or None if absent."""

    def delete_object(self, key: str) -> None: ...


class FilesystemBackend:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise BackendUnavailable(f"cannot create blob root {root}: {e}") from e

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / key

    def put_object(self, key: str, data: bytes) -> None:
        path = self._path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        except OSError as e:
            raise BackendUnavailable(f"filesystem backend write failed: {e}") from e

    def get_object(self, key: str) -> bytes | None:
        path = self._path(key)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None
        except OSError as e:
            raise BackendUnavailable(f"filesystem backend read failed: {e}") from e

    def delete_object(self, key: str) -> None:
        try:
            self._path(key).unlink(missing_ok=True)
        except OSError as e:
            raise BackendUnavailable(f"filesystem backend delete failed: {e}") from e


class S3Backend:
    """Minimal S3-compatible client: PUT/GET/DELETE an object by key.

    Talks path-style (``endpoint/bucket/key``, the MinIO default) and signs
    requests with AWS Signature V4 when credentials are configured.
    """

    def __init__(
        self,
        endpoint: str,
        bucket: str,
        access_key: str | None = None,
        secret_key: str | None = None,
        region: str = "us-east-1",
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.bucket = bucket
        self.region = region
        self._access_key = access_key
        self._secret_key = secret_key
        self._timeout = timeout
        self._session = session or requests.Session()

    def _url(self, key: str) -> str:
        return f"{self.endpoint}/{self.bucket}/{key}"

    def _request(self, method: str, key: str, data: bytes = b"") -> requests.Response:
        url = self._url(key)
        headers = self._sign(method, url, data)
        try:
            return self._session.request(
                method, url, data=data or None, headers=headers, timeout=self._timeout
            )
        except requests.RequestException as e:
            raise BackendUnavailable(f"S3 backend unreachable: {e}") from e

    def put_object(self, key: str, data: bytes) -> None:
        resp = self._request("PUT", key, data)
        if resp.status_code not in (200, 201, 204):
            raise BackendUnavailable(f"S3 PUT failed with status {resp.status_code}")

    def get_object(self, key: str) -> bytes | None:
        resp = self._request("GET", key)
        if resp.status_code == 404:
            return None
        if resp.status_code != 200:
            raise BackendUnavailable(f"S3 GET failed with status {resp.status_code}")
        return resp.content

    def delete_object(self, key: str) -> None:
        resp = self._request("DELETE", key)
        if resp.status_code not in (200, 204, 404):
            raise BackendUnavailable(f"S3 DELETE failed with status {resp.status_code}")

    def _sign(self, method: str, url: str, payload: bytes) -> dict[str, str]:
        parsed = urllib.parse.urlsplit(url)
        host = parsed.netloc
        payload_hash = hashlib.sha256(payload).hexdigest()
        now = datetime.datetime.now(datetime.timezone.utc)
        amz_date = now.strftime("%Y%m%dT%H%M%SZ")
        headers = {
            "Host": host,
            "x-amz-content-sha256": payload_hash,
            "x-amz-date": amz_date,
        }
        if not self._access_key or not self._secret_key:
            return headers

        datestamp = now.strftime("%Y%m%d")
        canonical_headers = "".join(
            f"{k.lower()}:{headers[k].strip()}\n" for k in sorted(headers, key=str.lower)
        )
        signed_headers = ";".join(sorted(k.lower() for k in headers))
        canonical_request = "\n".join(
            [
                method,
                urllib.parse.quote(parsed.path, safe="/-_.~"),
                "",  # no query string
                canonical_headers,
                signed_headers,
                payload_hash,
            ]
        )
        scope = f"{datestamp}/{self.region}/s3/aws4_request"
        string_to_sign = "\n".join(
            [
                "AWS4-HMAC-SHA256",
                amz_date,
                scope,
                hashlib.sha256(canonical_request.encode()).hexdigest(),
            ]
        )

        def _hmac(key: bytes, msg: str) -> bytes:
            return hmac.new(key, msg.encode(), hashlib.sha256).digest()

        k_date = _hmac(b"AWS4" + self._secret_key.encode(), datestamp)
        k_region = _hmac(k_date, self.region)
        k_service = _hmac(k_region, "s3")
        k_signing = _hmac(k_service, "aws4_request")
        signature = hmac.new(
            k_signing, string_to_sign.encode(), hashlib.sha256
        ).hexdigest()
        headers["Authorization"] = (
            f"AWS4-HMAC-SHA256 Credential={self._access_key}/{scope}, "
            f"SignedHeaders={signed_headers}, Signature={signature}"
        )
        return headers


class BlobStore:
    """Refcounted content-addressed store over an object backend.

    Methods taking a session participate in the caller's transaction and do
    not touch the physical object on the delete path; callers run
    :meth:`collect_garbage` for the digest after commit. The session-less
    wrappers are self-contained.
    """

    def __init__(self, backend: ObjectBackend, store: Store):
        self.backend = backend
        self.store = store

    # -- session-scoped primitives ------------------------------------

    def put_ref(self, session: Session, content: bytes, media_type: str) -> BlobRef:
        digest = sha256_hex(content)
        record = session.get(BlobRecord, digest)
        if record is None:
            record = BlobRecord(
                digest=digest, size=len(content), media_type=media_type, refcount=0
            )
            session.add(record)
        record.refcount += 1
        session.flush()
        self.backend.put_object(digest, content)
        return BlobRef(digest=digest, size=record.size, media_type=record.media_type)

    def release_ref(self, session: Session, digest: str) -> int:
        """Decrement and return the remaining refcount; the row is removed at
        zero. Physical deletion is the caller's post-commit step."""
        record = session.get(BlobRecord, digest)
        if record is None or record.refcount <= 0:
            raise BlobNotFound(f"no blob {digest!r}")
        record.refcount -= 1
        remaining = record.refcount
        if remaining == 0:
            session.delete(record)
        session.flush()
        return remaining

    def collect_garbage(self, digest: str) -> None:
        """Delete the physical object if no committed reference remains."""
        with self.store.session() as session:
            if session.get(BlobRecord, digest) is None:
                self.backend.delete_object(digest)

    # -- standalone operations -----------------------------------------

    def put_blob(self, content: bytes, media_type: str = "application/octet-stream") -> BlobRef:
        with self.store.begin() as session:
            return self.put_ref(session, content, media_type)

    def get_blob(self, ref: BlobRef | str) -> bytes:
        digest = ref.digest if isinstance(ref, BlobRef) else ref
        with self.store.session() as session:
            if session.get(BlobRecord, digest) is None:
                raise BlobNotFound(f"no blob {digest!r}")
        data = self.backend.get_object(digest)
        if data is None:
            raise IntegrityError(f"backend lost object {digest!r}")
        if sha256_hex(data) != digest:
            raise IntegrityError(f"backend bytes for {digest!r} fail hash verification")
        return data

    def get_ref(self, ref: BlobRef | str) -> BlobRef:
        digest = ref.digest if isinstance(ref, BlobRef) else ref
        with self.store.session() as session:
            record = session.get(BlobRecord, digest)
            if record is None:
                raise BlobNotFound(f"no blob {digest!r}")
            return BlobRef(digest=record.digest, size=record.size, media_type=record.media_type)

    def release_blob(self, ref: BlobRef | str) -> int:
        digest = ref.digest if isinstance(ref, BlobRef) else ref
        with self.store.begin() as session:
            remaining = self.release_ref(session, digest)
        if remaining == 0:
            self.backend.delete_object(digest)
        return remaining
