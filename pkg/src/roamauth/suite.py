"""Cryptographic primitives shared by both authentication schemes.

Concrete algorithm choices are declared here (and in the config file), not
hard-wired into the protocol logic:

* hash: SHA-256 truncated to 160 bits,
* symmetric encryption: AES-256-GCM (authenticated),
* signatures: ECDSA over the configured curve with deterministic nonces
  (RFC 6979), signing a 160-bit digest,
* point-to-key derivation: SHA-256 of the canonical point encoding.

A `CryptoSuite` binds these to a curve profile.  All methods are pure given
their inputs plus the caller-supplied randomness source; the public methods
report into the active operation counter (see instrument.py), while private
helpers stay off the books.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import curve as ec
from . import instrument
from .curve import CurveParams, Point
from .encoding import encode_concat

DIGEST_BYTES = 20  # 160-bit digests and identities
SYM_KEY_BYTES = 32
GCM_NONCE_BYTES = 12

HASH_ALG = "sha256-160"
CIPHER_ALG = "aes-256-gcm"
SIG_ALG = "ecdsa-rfc6979"


class SuiteError(Exception):
    """Base class for primitive-layer failures."""


class AuthenticationError(SuiteError):
    """Ciphertext failed integrity verification (wrong key or tampering)."""


class SignatureFormatError(SuiteError):
    """Signature bytes do not parse."""


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def to_bytes(self, cp: CurveParams) -> bytes:
        w = cp.scalar_bytes
        return self.r.to_bytes(w, "big") + self.s.to_bytes(w, "big")

    @classmethod
    def from_bytes(cls, cp: CurveParams, data: bytes) -> "Signature":
        w = cp.scalar_bytes
        if len(data) != 2 * w:
            raise SignatureFormatError(f"signature must be {2 * w} bytes")
        return cls(int.from_bytes(data[:w], "big"), int.from_bytes(data[w:], "big"))


@dataclass(frozen=True)
class KeyPair:
    priv: int
    pub: Point


@dataclass(frozen=True)
class Certificate:
    """Depth-1 certificate: subject identity and public key, CA-signed."""

    subject_id: bytes
    public_key: Point
    signature: Signature

    def to_bytes(self, cp: CurveParams) -> bytes:
        return encode_concat(
            [self.subject_id, self.public_key, self.signature.to_bytes(cp)], cp
        )

    @classmethod
    def from_bytes(cls, cp: CurveParams, data: bytes) -> "Certificate":
        from .encoding import decode_concat, field_bytes, field_point

        fields = decode_concat(data)
        if len(fields) != 3:
            raise SignatureFormatError("certificate must have three fields")
        return cls(
            subject_id=field_bytes(fields[0]),
            public_key=field_point(fields[1], cp),
            signature=Signature.from_bytes(cp, field_bytes(fields[2])),
        )


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _bits2int(data: bytes, n: int) -> int:
    """RFC 6979 bits2int: leftmost qlen bits of data as an integer."""
    qlen = n.bit_length()
    x = int.from_bytes(data, "big")
    blen = len(data) * 8
    if blen > qlen:
        x >>= blen - qlen
    return x


def _int2octets(x: int, n: int) -> bytes:
    rolen = (n.bit_length() + 7) // 8
    return x.to_bytes(rolen, "big")


def _bits2octets(data: bytes, n: int) -> bytes:
    z1 = _bits2int(data, n)
    z2 = z1 - n if z1 >= n else z1
    return _int2octets(z2, n)


def _rfc6979_nonce(cp: CurveParams, priv: int, digest: bytes) -> int:
    """Deterministic ECDSA nonce (RFC 6979, HMAC-SHA256)."""
    n = cp.n
    holen = 32
    V = b"\x01" * holen
    K = b"\x00" * holen
    seed = _int2octets(priv, n) + _bits2octets(digest, n)
    K = hmac.new(K, V + b"\x00" + seed, hashlib.sha256).digest()
    V = hmac.new(K, V, hashlib.sha256).digest()
    K = hmac.new(K, V + b"\x01" + seed, hashlib.sha256).digest()
    V = hmac.new(K, V, hashlib.sha256).digest()
    while True:
        T = b""
        while len(T) * 8 < n.bit_length():
            V = hmac.new(K, V, hashlib.sha256).digest()
            T += V
        k = _bits2int(T, n)
        if 1 <= k < n:
            return k
        K = hmac.new(K, V + b"\x00", hashlib.sha256).digest()
        V = hmac.new(K, V, hashlib.sha256).digest()


class CryptoSuite:
    """Primitive set bound to one curve profile."""

    def __init__(self, cp: CurveParams):
        self.cp = cp

    # -- hashing and masking -------------------------------------------------

    def hash160(self, data: bytes) -> bytes:
        """160-bit one-way hash (SHA-256 truncated)."""
        instrument.record("hash")
        return _sha256(data)[:DIGEST_BYTES]

    def hash_fields(self, items: list | tuple) -> bytes:
        """hash160 over the canonical encoding of a field list."""
        return self.hash160(self.encode(items))

    def xor160(self, d1: bytes, d2: bytes) -> bytes:
        if len(d1) != len(d2):
            raise SuiteError(f"xor operands differ in length: {len(d1)} vs {len(d2)}")
        instrument.record("xor")
        return bytes(a ^ b for a, b in zip(d1, d2))

    # -- group operations ----------------------------------------------------

    def scalar_mul(self, k: int, pt: Point, *, precomputable: bool = False) -> Point:
        """Point scalar multiplication, tagged precomputable when it does not
        depend on any received message."""
        instrument.record("mul", pre=precomputable)
        return ec.scalar_mul(self.cp, k, pt)

    def point_add(self, p1: Point, p2: Point) -> Point:
        return ec.point_add(self.cp, p1, p2)

    def validate_point(self, pt: Point) -> Point:
        return ec.validate_point(self.cp, pt)

    def encode(self, items: list | tuple) -> bytes:
        return encode_concat(items, self.cp)

    def point_bytes(self, pt: Point) -> bytes:
        return ec.point_to_bytes(self.cp, pt)

    # -- randomness ----------------------------------------------------------

    def rand_scalar(self, rng: random.Random) -> int:
        return rng.randrange(1, self.cp.n)

    def rand_bytes(self, rng: random.Random, count: int) -> bytes:
        return rng.randbytes(count)

    def keygen(self, rng: random.Random) -> KeyPair:
        priv = self.rand_scalar(rng)
        return KeyPair(priv, ec.scalar_mul(self.cp, priv, self.cp.generator))

    # -- point-keyed symmetric encryption --------------------------------------

    def kdf_point(self, pt: Point) -> bytes:
        """Derive a symmetric key from a shared group point."""
        if pt.is_infinity:
            raise SuiteError("cannot derive a key from the identity point")
        instrument.record("kdf")
        return _sha256(b"roamauth-point-key" + ec.point_to_bytes(self.cp, pt))

    def ae_encrypt(self, key: bytes, plaintext: bytes, rng: random.Random | None = None) -> bytes:
        """Authenticated encryption; ciphertext = nonce || AES-GCM output."""
        instrument.record("esym")
        nonce = rng.randbytes(GCM_NONCE_BYTES) if rng is not None else os.urandom(GCM_NONCE_BYTES)
        return nonce + AESGCM(key).encrypt(nonce, plaintext, None)

    def ae_decrypt(self, key: bytes, ciphertext: bytes) -> bytes:
        instrument.record("dsym")
        if len(ciphertext) < GCM_NONCE_BYTES + 16:
            raise AuthenticationError("ciphertext too short")
        nonce, body = ciphertext[:GCM_NONCE_BYTES], ciphertext[GCM_NONCE_BYTES:]
        try:
            return AESGCM(key).decrypt(nonce, body, None)
        except InvalidTag as exc:
            raise AuthenticationError("ciphertext failed authentication") from exc

    # -- MAC (keyed tag used by the legacy scheme) ------------------------------

    def mac160(self, key: bytes, data: bytes) -> bytes:
        instrument.record("mac")
        return hmac.new(key, data, hashlib.sha256).digest()[:DIGEST_BYTES]

    # -- signatures ------------------------------------------------------------

    def _sign_digest(self, priv: int, digest: bytes) -> Signature:
        cp = self.cp
        z = _bits2int(digest, cp.n)
        while True:
            k = _rfc6979_nonce(cp, priv, digest)
            R = ec.scalar_mul(cp, k, cp.generator)
            r = R.x % cp.n
            if r == 0:
                digest = _sha256(digest)[:DIGEST_BYTES]  # pragma: no cover
                continue
            s = pow(k, -1, cp.n) * (z + r * priv) % cp.n
            if s == 0:
                digest = _sha256(digest)[:DIGEST_BYTES]  # pragma: no cover
                continue
            return Signature(r, s)

    def _verify_digest(self, pub: Point, digest: bytes, sig: Signature) -> bool:
        cp = self.cp
        if not (1 <= sig.r < cp.n and 1 <= sig.s < cp.n):
            return False
        if not ec.is_on_curve(cp, pub) or pub.is_infinity:
            return False
        z = _bits2int(digest, cp.n)
        w = pow(sig.s, -1, cp.n)
        u1 = z * w % cp.n
        u2 = sig.r * w % cp.n
        R = ec.point_add(
            cp,
            ec.scalar_mul(cp, u1, cp.generator) if u1 else ec.INFINITY,
            ec.scalar_mul(cp, u2, pub),
        )
        if R.is_infinity:
            return False
        return R.x % cp.n == sig.r

    def sign_over(self, priv: int, items: list | tuple) -> Signature:
        """Signature over the 160-bit digest of a field list.  Counted as one
        signature-generation operation; the digest it embeds is not billed
        separately."""
        instrument.record("gsign")
        digest = _sha256(self.encode(items))[:DIGEST_BYTES]
        return self._sign_digest(priv, digest)

    def verify_over(self, pub: Point, items: list | tuple, sig: Signature) -> bool:
        instrument.record("vsign")
        digest = _sha256(self.encode(items))[:DIGEST_BYTES]
        return self._verify_digest(pub, digest, sig)

    # -- certificates ------------------------------------------------------------

    def issue_certificate(self, ca: KeyPair, subject_id: bytes, pub: Point) -> Certificate:
        digest = _sha256(self.encode([subject_id, pub]))[:DIGEST_BYTES]
        return Certificate(subject_id, pub, self._sign_digest(ca.priv, digest))

    def verify_certificate(self, ca_pub: Point, cert: Certificate) -> bool:
        """Root-CA check; tracked apart from protocol signature verification
        because the comparison tables do not itemize certificate handling."""
        instrument.record("vcert")
        digest = _sha256(self.encode([cert.subject_id, cert.public_key]))[:DIGEST_BYTES]
        return self._verify_digest(ca_pub, digest, cert.signature)


def identity_from_label(label: str) -> bytes:
    """Map a human-readable label to the fixed 160-bit identity width."""
    return _sha256(b"roamauth-id" + label.encode("utf-8"))[:DIGEST_BYTES]


@dataclass(frozen=True)
class SuiteConfig:
    """Declared algorithm selection, loadable from a JSON config file."""

    curve: str = "p256"
    hash: str = HASH_ALG
    cipher: str = CIPHER_ALG
    signature: str = SIG_ALG

    @classmethod
    def load(cls, path: str | None = None) -> "SuiteConfig":
        if path is None:
            path = os.environ.get("ROAMAUTH_CONFIG")
        if path is None:
            return cls()
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        cfg = cls(**{k: raw[k] for k in raw if k in {"curve", "hash", "cipher", "signature"}})
        cfg.validate()
        return cfg

    def validate(self) -> None:
        ec.get_profile(self.curve)
        if self.hash != HASH_ALG:
            raise SuiteError(f"unsupported hash {self.hash!r} (only {HASH_ALG})")
        if self.cipher != CIPHER_ALG:
            raise SuiteError(f"unsupported cipher {self.cipher!r} (only {CIPHER_ALG})")
        if self.signature != SIG_ALG:
            raise SuiteError(f"unsupported signature {self.signature!r} (only {SIG_ALG})")

    def build(self) -> CryptoSuite:
        self.validate()
        return CryptoSuite(ec.get_profile(self.curve))
