"""Generic blindness compiler for round-based protocols.

Any protocol whose messages are classical bitstrings can be wrapped in
per-round homomorphic encryption with fresh keys: the verifier decrypts
each prover message, computes its next message in the clear, and sends it
re-encrypted under a fresh key together with the previous secret key
encrypted under the new one; the prover key-switches its encrypted state
by homomorphically evaluating the decryption function, then evaluates its
next-message function homomorphically.  Round count and outputs are
preserved, and the verifier never crashes on malformed ciphertexts: a
failed decryption yields a default all-zeros message.

Two mock schemes are bundled: a transparent scheme (ciphertext = tagged
plaintext, evaluation runs the function directly) for exactness tests,
and a keyed-stream scheme with strictly one-time pads for blindness-shape
tests.  The stream scheme is not cryptographically secure; it exists so
transcript distributions can be compared with information-theoretic pads.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)


class UnsupportedEvalError(RuntimeError):
    """The scheme cannot homomorphically evaluate the requested function."""


class KeyReuseError(RuntimeError):
    """A pad-reusing scheme was used where one-time keys are required."""


class CompileError(ValueError):
    """The protocol cannot be compiled under the given scheme."""


# -- round protocols ---------------------------------------------------------


@dataclass(frozen=True)
class Prover:
    """A prover implementation: next-message functions over byte messages."""

    first: Callable  # (rng, v1: bytes, x: str) -> (p1: bytes, st)
    next: Callable  # (t, v_t: bytes, st, rng) -> (p_t: bytes, st)


@dataclass(frozen=True)
class RoundProtocol:
    """A T-round protocol with classical messages and verifier-side output.

    Message flow: v_1, p_1, v_2, p_2, ..., v_T, p_T, then the verifier
    computes its output from p_T.  Next-message functions must be
    deterministic given their explicit RNG stream, and verifier functions
    must return a verdict for arbitrary (possibly malformed) prover bytes.
    Prover states must be bytes so the compiled protocol can carry them
    under encryption.
    """

    name: str
    rounds: int
    verifier_first: Callable  # (rng, x: str) -> (v1: bytes, st)
    verifier_next: Callable  # (t, p_prev: bytes, st, rng) -> (v_t: bytes, st)
    verifier_out: Callable  # (p_T: bytes, st) -> bytes
    prover_first: Callable  # (rng, v1: bytes, x: str) -> (p1: bytes, st: bytes)
    prover_next: Callable  # (t, v_t: bytes, st: bytes, rng) -> (p_t: bytes, st: bytes)
    prover_msg_len: tuple | None = None
    verifier_msg_len: tuple | None = None
    prover_depth: int = 1
    prover_fdesc: tuple | None = None  # linear descriptor for stream-cipher eval

    def honest_prover(self) -> Prover:
        return Prover(self.prover_first, self.prover_next)


@dataclass
class Transcript:
    """Ordered record of the messages exchanged in one protocol run."""

    entries: list = field(default_factory=list)
    output: bytes | None = None

    def record(self, direction: str, round_index: int, payload: bytes) -> None:
        self.entries.append((direction, round_index, bytes(payload)))

    def messages(self, direction: str) -> list[bytes]:
        return [p for d, _, p in self.entries if d == direction]

    def dump_jsonl(self) -> str:
        lines = [
            json.dumps({"dir": d, "round": r, "hex": p.hex()}, sort_keys=True)
            for d, r, p in self.entries
        ]
        if self.output is not None:
            lines.append(json.dumps({"dir": "out", "round": -1, "hex": self.output.hex()}))
        return "\n".join(lines) + "\n"


def _substitute(payload: bytes, declared: int | None, where: str) -> bytes:
    if declared is not None and len(payload) != declared:
        logger.warning(
            "%s message has %d bytes, expected %d; substituting default",
            where,
            len(payload),
            declared,
        )
        return b"\x00" * declared
    return payload


def split_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(children[0]), np.random.default_rng(children[1])


def run_protocol(
    pi: RoundProtocol,
    x: str,
    prover: Prover | None = None,
    seed: int = 0,
    prover_input: str | None = None,
) -> tuple[Transcript, bytes]:
    """Execute the protocol with a seeded verifier/prover stream split.

    ``prover_input`` is what the prover learns about x; it defaults to x
    itself (the common-input setting) and is replaced by a dummy of the
    same length in blindness experiments.
    """
    if prover is None:
        prover = pi.honest_prover()
    if prover_input is None:
        prover_input = x
    rng_v, rng_p = split_streams(seed)
    transcript = Transcript()

    v_msg, st_v = pi.verifier_first(rng_v, x)
    transcript.record("V->P", 1, v_msg)
    p_msg, st_p = prover.first(rng_p, v_msg, prover_input)
    p_msg = _substitute(p_msg, pi.prover_msg_len[0] if pi.prover_msg_len else None, "prover")
    transcript.record("P->V", 1, p_msg)

    for t in range(2, pi.rounds + 1):
        v_msg, st_v = pi.verifier_next(t, p_msg, st_v, rng_v)
        transcript.record("V->P", t, v_msg)
        p_msg, st_p = prover.next(t, v_msg, st_p, rng_p)
        declared = pi.prover_msg_len[t - 1] if pi.prover_msg_len else None
        p_msg = _substitute(p_msg, declared, "prover")
        transcript.record("P->V", t, p_msg)

    output = pi.verifier_out(p_msg, st_v)
    transcript.output = output
    return transcript, output


# -- mock homomorphic schemes --------------------------------------------------


@dataclass(frozen=True)
class QHEScheme:
    """Classical-friendly homomorphic-encryption interface.

    ``dec`` never fails: anything unparseable decrypts to all-zeros of the
    requested length.  ``eval`` takes a function descriptor tuple; the
    transparent mock executes arbitrary ('call', fn) descriptors while the
    keyed-stream mock only supports pad-commuting descriptors.
    """

    name: str
    keygen: Callable  # (rng, level) -> (pk, sk)
    enc: Callable  # (pk, msg: bytes) -> ct dict
    dec: Callable  # (sk, ct, length | None) -> bytes
    eval: Callable  # (pk, fdesc, cts, rng) -> ct dict | list of ct dicts
    max_level: int = 2**20
    classical_friendly: bool = True
    reuses_pads: bool = False


def _ct_payload(ct, expected_key: str | None = None) -> bytes:
    if not isinstance(ct, dict):
        return b""
    if expected_key is not None and ct.get("key") != expected_key:
        return b""
    try:
        return bytes.fromhex(ct.get("payload", ""))
    except (TypeError, ValueError):
        return b""


def _fit(msg: bytes, length: int | None) -> bytes:
    if length is None:
        return msg
    return msg[:length].ljust(length, b"\x00")


def transparent_qhe() -> QHEScheme:
    """Ciphertext = key-tagged plaintext; eval applies functions directly."""

    def keygen(rng: np.random.Generator, level: int):
        kid = f"t{int(rng.integers(0, 2**62))}"
        return {"scheme": "transparent", "kid": kid}, {"scheme": "transparent", "kid": kid}

    def enc(pk, msg: bytes):
        return {"ct": "transparent", "key": pk["kid"], "payload": bytes(msg).hex()}

    def dec(sk, ct, length=None):
        return _fit(_ct_payload(ct, sk.get("kid")), length)

    def eval_(pk, fdesc, cts, rng):
        kind = fdesc[0]
        if kind == "identity":
            return dict(cts[0], key=pk["kid"]) if isinstance(cts[0], dict) else enc(pk, b"")
        if kind == "xor_const":
            payload = _ct_payload(cts[0], pk["kid"])
            const = fdesc[1]
            out = bytes(a ^ b for a, b in zip(payload, const.ljust(len(payload), b"\x00")))
            return enc(pk, out)
        if kind == "qhe_dec":
            sk_bytes = _ct_payload(cts[0], pk["kid"])
            inner_bytes = _ct_payload(cts[1], pk["kid"])
            try:
                sk_prev = json.loads(sk_bytes.decode())
                inner_ct = json.loads(inner_bytes.decode())
            except (ValueError, UnicodeDecodeError):
                return enc(pk, b"")
            return enc(pk, dec(sk_prev, inner_ct, None))
        if kind == "call":
            fn = fdesc[1]
            plain = [_ct_payload(ct, pk["kid"]) for ct in cts]
            results = fn(*plain)
            if isinstance(results, bytes):
                results = (results,)
            return [enc(pk, r) for r in results]
        raise UnsupportedEvalError(f"transparent mock does not know {kind!r}")

    return QHEScheme(
        name="transparent", keygen=keygen, enc=enc, dec=dec, eval=eval_
    )


def otp_qhe(reuse_pad: bool = False) -> QHEScheme:
    """Keyed-stream mock: enc XORs a per-key, per-counter SHAKE pad.

    Counters make every pad one-time; ``reuse_pad=True`` builds the
    deliberately broken negative-control scheme whose pads repeat.  Eval
    supports only descriptors that commute with the pad (identity,
    xor-with-constant), so only protocols with declared linear
    next-message functions run under it.
    """
    seeds: dict[str, bytes] = {}
    counters: dict[str, int] = {}

    def _pad(kid: str, ctr: int, length: int) -> bytes:
        h = hashlib.shake_256(seeds[kid] + ctr.to_bytes(8, "big"))
        return h.digest(length)

    def keygen(rng: np.random.Generator, level: int):
        seed = rng.bytes(16)
        kid = hashlib.sha256(seed).hexdigest()[:16]
        seeds[kid] = seed
        counters[kid] = 0
        pk = {"scheme": "otp", "kid": kid}
        sk = {"scheme": "otp", "kid": kid, "seed": seed.hex()}
        return pk, sk

    def enc(pk, msg: bytes):
        kid = pk["kid"]
        if kid not in seeds:
            raise KeyReuseError("encryption under a key this scheme did not generate")
        if reuse_pad:
            ctr = 0
        else:
            ctr = counters[kid]
            counters[kid] = ctr + 1
        pad = _pad(kid, ctr, len(msg))
        payload = bytes(a ^ b for a, b in zip(msg, pad))
        return {"ct": "otp", "key": kid, "ctr": ctr, "payload": payload.hex()}

    def dec(sk, ct, length=None):
        if not isinstance(ct, dict) or ct.get("key") != sk.get("kid"):
            return _fit(b"", length)
        kid = sk["kid"]
        seeds.setdefault(kid, bytes.fromhex(sk["seed"]))
        payload = _ct_payload(ct)
        try:
            ctr = int(ct.get("ctr", 0))
        except (TypeError, ValueError):
            return _fit(b"", length)
        pad = _pad(kid, ctr, len(payload))
        return _fit(bytes(a ^ b for a, b in zip(payload, pad)), length)

    def eval_(pk, fdesc, cts, rng):
        kind = fdesc[0]
        if kind == "identity":
            ct = cts[0]
            if isinstance(ct, dict) and ct.get("key") == pk["kid"]:
                return dict(ct)
            return enc(pk, b"")
        if kind == "xor_const":
            ct = cts[0]
            if not (isinstance(ct, dict) and ct.get("key") == pk["kid"]):
                return enc(pk, b"")
            payload = _ct_payload(ct)
            const = fdesc[1]
            out = bytes(a ^ b for a, b in zip(payload, const.ljust(len(payload), b"\x00")))
            return dict(ct, payload=out.hex())
        raise UnsupportedEvalError(
            f"keyed-stream mock cannot evaluate {kind!r}; "
            "declare a linear prover descriptor or use the transparent mock"
        )

    return QHEScheme(
        name="otp-reused" if reuse_pad else "otp",
        keygen=keygen,
        enc=enc,
        dec=dec,
        eval=eval_,
        reuses_pads=reuse_pad,
    )


# -- the compiler ---------------------------------------------------------------


def _encode(obj) -> bytes:
    return json.dumps(obj, sort_keys=True).encode()


def _decode(payload: bytes):
    try:
        return json.loads(payload.decode())
    except (ValueError, UnicodeDecodeError):
        return None


def compile_blind(pi: RoundProtocol, qhe: QHEScheme) -> RoundProtocol:
    """Wrap ``pi`` in per-round encryption with fresh keys.

    The compiled protocol has exactly the same number of rounds.  Its
    verifier computes the source next-message functions in the clear on
    decrypted prover messages; its honest prover evaluates the source
    prover homomorphically, key-switching its encrypted state through the
    eval-of-decryption step whenever it carries state.
    """
    if not qhe.classical_friendly:
        raise CompileError("scheme is not classical-friendly")
    if pi.prover_depth > qhe.max_level:
        raise CompileError(
            f"prover depth {pi.prover_depth} exceeds scheme level cap {qhe.max_level}"
        )

    def verifier_first(rng, x: str):
        crypto = rng.spawn(1)[0]
        v1, st_src = pi.verifier_first(rng, x)
        pk, sk = qhe.keygen(crypto, pi.prover_depth)
        bundle = {
            "pk": pk,
            "x": qhe.enc(pk, x.encode()),
            "v": qhe.enc(pk, v1),
        }
        return _encode(bundle), {"src": st_src, "sk": sk, "pk": pk, "crypto": crypto}

    def verifier_next(t, p_prev: bytes, st, rng):
        declared = pi.prover_msg_len[t - 2] if pi.prover_msg_len else None
        plain = qhe.dec(st["sk"], _decode(p_prev), declared)
        v_t, st_src = pi.verifier_next(t, plain, st["src"], rng)
        pk, sk = qhe.keygen(st["crypto"], pi.prover_depth)
        bundle = {
            "pk": pk,
            "v": qhe.enc(pk, v_t),
            "sk_prev": qhe.enc(pk, _encode(st["sk"])),
        }
        return _encode(bundle), {
            "src": st_src,
            "sk": sk,
            "pk": pk,
            "crypto": st["crypto"],
        }

    def verifier_out(p_last: bytes, st):
        declared = pi.prover_msg_len[pi.rounds - 1] if pi.prover_msg_len else None
        plain = qhe.dec(st["sk"], _decode(p_last), declared)
        return pi.verifier_out(plain, st["src"])

    def _first_fdesc(rng):
        if pi.prover_fdesc is not None:
            return pi.prover_fdesc

        def fn(v_plain: bytes, x_plain: bytes):
            try:
                x_str = x_plain.decode()
            except UnicodeDecodeError:
                x_str = ""
            p1, st1 = pi.prover_first(rng, v_plain, x_str)
            return (p1, st1)

        return ("call", fn)

    def _next_fdesc(t, rng):
        if pi.prover_fdesc is not None:
            return pi.prover_fdesc

        def fn(v_plain: bytes, st_plain: bytes):
            p_t, st_t = pi.prover_next(t, v_plain, st_plain, rng)
            return (p_t, st_t)

        return ("call", fn)

    def prover_first(rng, v1_bytes: bytes, _x: str):
        bundle = _decode(v1_bytes) or {}
        pk = bundle.get("pk", {})
        fdesc = _first_fdesc(rng)
        if fdesc[0] == "call":
            ct_p, ct_st = qhe.eval(pk, fdesc, [bundle.get("v"), bundle.get("x")], rng)
        else:
            ct_p = qhe.eval(pk, fdesc, [bundle.get("v")], rng)
            ct_st = None
        return _encode(ct_p), {"pk": pk, "ct_st": ct_st}

    def prover_next(t, vt_bytes: bytes, st, rng):
        bundle = _decode(vt_bytes) or {}
        pk = bundle.get("pk", {})
        ct_st = st.get("ct_st")
        if ct_st is not None and _ct_payload(ct_st):
            # Key switch: wrap the old-state ciphertext under the new key,
            # then evaluate decryption homomorphically.
            wrapped = qhe.enc(pk, _encode(ct_st))
            ct_st = qhe.eval(pk, ("qhe_dec",), [bundle.get("sk_prev"), wrapped], rng)
        fdesc = _next_fdesc(t, rng)
        if fdesc[0] == "call":
            ct_p, ct_st_new = qhe.eval(pk, fdesc, [bundle.get("v"), ct_st], rng)
        else:
            ct_p = qhe.eval(pk, fdesc, [bundle.get("v")], rng)
            ct_st_new = None
        return _encode(ct_p), {"pk": pk, "ct_st": ct_st_new}

    return RoundProtocol(
        name=f"blind({pi.name})",
        rounds=pi.rounds,
        verifier_first=verifier_first,
        verifier_next=verifier_next,
        verifier_out=verifier_out,
        prover_first=prover_first,
        prover_next=prover_next,
        prover_msg_len=None,
        verifier_msg_len=None,
        prover_depth=pi.prover_depth,
        prover_fdesc=None,
    )


# -- the explicit simulation of blind adversaries --------------------------------


def simulate_pstar(
    blind_adversary: Prover, pi: RoundProtocol, qhe: QHEScheme
) -> Prover:
    """Turn a prover against the compiled protocol into one against ``pi``.

    The constructed prover generates its own key pairs, feeds the blind
    adversary encrypted bundles exactly as the compiled verifier would,
    and decrypts the replies.  Against the transparent mock, the two
    experiments produce identical outputs seed for seed.
    """

    def first(rng, v1: bytes, x: str):
        crypto = rng.spawn(1)[0]
        pk, sk = qhe.keygen(crypto, pi.prover_depth)
        bundle = {"pk": pk, "x": qhe.enc(pk, x.encode()), "v": qhe.enc(pk, v1)}
        ct_bytes, st_b = blind_adversary.first(rng, _encode(bundle), x)
        p1 = qhe.dec(sk, _decode(ct_bytes), pi.prover_msg_len[0] if pi.prover_msg_len else None)
        return p1, {"sk": sk, "st_b": st_b, "crypto": crypto}

    def next_(t, v_t: bytes, st, rng):
        pk, sk = qhe.keygen(st["crypto"], pi.prover_depth)
        bundle = {
            "pk": pk,
            "v": qhe.enc(pk, v_t),
            "sk_prev": qhe.enc(pk, _encode(st["sk"])),
        }
        ct_bytes, st_b = blind_adversary.next(t, _encode(bundle), st["st_b"], rng)
        declared = pi.prover_msg_len[t - 1] if pi.prover_msg_len else None
        p_t = qhe.dec(sk, _decode(ct_bytes), declared)
        return p_t, {"sk": sk, "st_b": st_b, "crypto": st["crypto"]}

    return Prover(first, next_)


# -- transcript checks and blindness experiment -----------------------------------


def check_fresh_key_discipline(transcript: Transcript) -> None:
    """Every round uses a fresh pk, and secret keys travel only inside a
    ciphertext envelope keyed by that round's pk."""
    seen = set()
    for _, _, payload in [e for e in transcript.entries if e[0] == "V->P"]:
        bundle = _decode(payload)
        if not isinstance(bundle, dict):
            raise AssertionError("verifier message is not a bundle")
        pk = bundle.get("pk", {})
        kid = pk.get("kid")
        if kid in seen:
            raise AssertionError(f"public key {kid} reused across rounds")
        seen.add(kid)
        for name, value in bundle.items():
            if name == "pk":
                continue
            if not isinstance(value, dict) or value.get("key") != kid:
                raise AssertionError(
                    f"field {name!r} is not encrypted under the round key"
                )
        if "sk_prev" in bundle:
            inner = _decode(_ct_payload(bundle["sk_prev"], kid) or b"null")
            # Transparent payloads expose the plaintext; the structural
            # requirement is that the sk appears nowhere outside this field.
            raw = json.dumps(bundle, sort_keys=True)
            if inner and inner.get("seed") and inner["seed"] in raw.replace(
                json.dumps(bundle["sk_prev"], sort_keys=True), ""
            ):
                raise AssertionError("secret key material leaked outside its envelope")


def default_distinguisher(transcript: Transcript) -> int:
    """1 iff the first verifier bundle's two ciphertext payloads coincide.

    Mirrors the hybrid argument's first step: with one-time pads the two
    payloads are independent uniform strings, while pad reuse makes their
    XOR equal the XOR of the plaintexts.
    """
    first_v = transcript.messages("V->P")[0]
    bundle = _decode(first_v) or {}
    a = _ct_payload(bundle.get("x"))
    b = _ct_payload(bundle.get("v"))
    return int(a == b and len(a) > 0)


@dataclass(frozen=True)
class BlindnessResult:
    advantage: float
    sigma: float
    trials: int
    rate_x: float
    rate_zero: float

    def to_json_dict(self) -> dict:
        return {
            "advantage": self.advantage,
            "sigma": self.sigma,
            "trials": self.trials,
            "rate_x": self.rate_x,
            "rate_zero": self.rate_zero,
        }


def blindness_experiment(
    pi: RoundProtocol,
    qhe: QHEScheme,
    adversary: Prover | None,
    x: str,
    trials: int,
    seed: int = 0,
    distinguisher: Callable[[Transcript], int] | None = None,
    allow_pad_reuse: bool = False,
) -> BlindnessResult:
    """Estimate the distinguishing advantage between View(x) and View(0^|x|).

    Runs the compiled protocol ``trials`` times on each input with the
    prover learning only |x|, applies the distinguisher to each prover
    view, and reports |rate_x - rate_zero| with its binomial sigma.
    """
    if qhe.reuses_pads and not allow_pad_reuse:
        raise KeyReuseError(
            "scheme reuses pads; pass allow_pad_reuse=True only for negative controls"
        )
    compiled = compile_blind(pi, qhe)
    if adversary is None:
        adversary = compiled.honest_prover()
    if distinguisher is None:
        distinguisher = default_distinguisher
    zero = "0" * len(x)
    dummy = "0" * len(x)
    rng = np.random.default_rng(seed)
    hits_x = hits_zero = 0
    for _ in range(trials):
        s1, s2 = int(rng.integers(0, 2**62)), int(rng.integers(0, 2**62))
        t_x, _ = run_protocol(compiled, x, adversary, seed=s1, prover_input=dummy)
        t_0, _ = run_protocol(compiled, zero, adversary, seed=s2, prover_input=dummy)
        hits_x += distinguisher(t_x)
        hits_zero += distinguisher(t_0)
    rate_x = hits_x / trials
    rate_zero = hits_zero / trials
    sigma = float(
        np.sqrt(
            (rate_x * (1 - rate_x) + rate_zero * (1 - rate_zero)) / trials
            + 1e-12
        )
    )
    return BlindnessResult(
        advantage=abs(rate_x - rate_zero),
        sigma=sigma,
        trials=trials,
        rate_x=rate_x,
        rate_zero=rate_zero,
    )
