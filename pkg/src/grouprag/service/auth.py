"""Bearer-token authentication.

Tokens are 32 random bytes presented as opaque hex; only the SHA-256 of the
secret is stored, so a database leak does not leak credentials. Revoked
tokens never authenticate.
"""

from __future__ import annotations

import hashlib
import secrets

from ..db import ApiToken, Principal, Store
from ..errors import PrincipalNotFound, Unauthorized


def _hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


class TokenService:
    def __init__(self, store: Store):
        self.store = store

    def ensure_principal(self, principal_id: str, display_name: str | None = None) -> Principal:
        with self.store.begin() as session:
            principal = session.get(Principal, principal_id)
            if principal is None:
                principal = Principal(
                    id=principal_id, display_name=display_name or principal_id
                )
                session.add(principal)
            return principal

    def create_token(self, principal_id: str) -> str:
        """Mint a token for an existing principal and return the secret,
        which is never stored or recoverable."""
        secret = secrets.token_hex(32)
        with self.store.begin() as session:
            if session.get(Principal, principal_id) is None:
                raise PrincipalNotFound(f"no principal {principal_id!r}")
            session.add(ApiToken(token_hash=_hash_token(secret), principal_id=principal_id))
        return secret

    def authenticate(self, token: str | None) -> Principal:
        if not token:
            raise Unauthorized("missing bearer token")
        with self.store.session() as session:
            record = session.get(ApiToken, _hash_token(token))
            if record is None or record.revoked:
                raise Unauthorized("unknown or revoked token")
            principal = session.get(Principal, record.principal_id)
            if principal is None:
                raise Unauthorized("token principal no longer exists")
            return principal

    def revoke(self, token: str) -> None:
        with self.store.begin() as session:
            record = session.get(ApiToken, _hash_token(token))
            if record is None:
                raise Unauthorized("unknown token")
            record.revoked = True
