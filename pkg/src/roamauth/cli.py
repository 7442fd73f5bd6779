"""Command-line interface: handshakes, attacks, and comparison reports.

Four subcommands:

* register  - issue a smart card to a user and write it to a card file
* handshake - run one scenario, write transcript + cost report, exit 0 iff
              both sides derived the same key
* attack    - run one adversary strategy, write the outcome JSON, exit 0 iff
              the verdict matches --expect
* report    - assemble the communication/computation/functionality tables
              from prior run artifacts

Every command is deterministic under --seed.  Security assertions (--expect
failure, and the functionality matrix) are refused on the toy curve unless
--allow-toy is set, because its discrete logs are breakable by design.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import attacks, harness
from . import curve as ec
from . import proposed as prop
from .suite import CryptoSuite, SuiteConfig, identity_from_label

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


def _suite_for(curve_name: str | None) -> CryptoSuite:
    cfg = SuiteConfig.load()
    if curve_name:
        cfg = SuiteConfig(curve=curve_name, hash=cfg.hash, cipher=cfg.cipher,
                          signature=cfg.signature)
    return cfg.build()


def _is_toy(suite: CryptoSuite) -> bool:
    return suite.cp.n < (1 << 20)


# ---------------------------------------------------------------------------
# register


def cmd_register(args) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        print(f"error: {out} exists (use --force to overwrite)", file=sys.stderr)
        return EXIT_USAGE
    suite = _suite_for(args.curve)
    rng = random.Random(args.seed)
    world = harness.build_proposed_world(
        suite, rng, user_label=args.id, password=args.password.encode()
    )
    card = world.mu.card
    record = {
        "curve": suite.cp.name,
        "world_seed": args.seed,
        "user_label": args.id,
        "masked_key": card.masked_key.hex(),
        "login_verifier": card.login_verifier.hex(),
        "home_dh_pub": ec.point_to_bytes(suite.cp, card.home_dh_pub).hex(),
        "home_id": card.home_id.hex(),
        "card_salt": card.card_salt.hex(),
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(record, indent=2))
    print(f"card written to {out}")
    return EXIT_OK


def load_card(suite: CryptoSuite, path: Path) -> tuple[prop.SmartCard, str, int]:
    rec = json.loads(path.read_text())
    if rec["curve"] != suite.cp.name:
        raise ValueError(
            f"card was issued on curve {rec['curve']}, current profile is {suite.cp.name}"
        )
    card = prop.SmartCard(
        masked_key=bytes.fromhex(rec["masked_key"]),
        login_verifier=bytes.fromhex(rec["login_verifier"]),
        home_dh_pub=ec.point_from_bytes(suite.cp, bytes.fromhex(rec["home_dh_pub"])),
        home_id=bytes.fromhex(rec["home_id"]),
        card_salt=bytes.fromhex(rec["card_salt"]),
    )
    return card, rec["user_label"], rec["world_seed"]


# ---------------------------------------------------------------------------
# handshake


def _tamper_hook(kind: str):
    def hook(sender, receiver, msg_kind, raw: bytes) -> bytes:
        if msg_kind == kind:
            body = bytearray(raw)
            body[-1] ^= 0x01
            return bytes(body)
        return raw

    return hook


def cmd_handshake(args) -> int:
    if args.scenario_file:
        try:
            spec = harness.ScenarioSpec.load(args.scenario_file)
        except (OSError, ValueError, harness.HarnessError) as exc:
            print(f"error: bad scenario file: {exc}", file=sys.stderr)
            return EXIT_USAGE
        args.scheme = spec.scheme
        args.scenario = spec.scenario
        args.seed = spec.seed
        args.curve = spec.curve
        args.update_rounds = spec.update_rounds
    suite = _suite_for(args.curve)
    rng = random.Random(args.seed)

    world = None
    if args.card:
        if args.scheme != "proposed":
            print("error: --card applies to the proposed scheme only", file=sys.stderr)
            return EXIT_USAGE
        try:
            card, label, world_seed = load_card(suite, Path(args.card))
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot load card: {exc}", file=sys.stderr)
            return EXIT_USAGE
        world = harness.build_proposed_world(suite, random.Random(world_seed),
                                             user_label=label)
        password = (args.password or "").encode()
        world.mu = prop.MUState(identity_from_label(label), password, card)

    adversary = _tamper_hook(args.tamper) if args.tamper else None
    try:
        result = harness.run_session(
            suite, args.scheme, args.scenario, rng,
            world=world, adversary=adversary, update_rounds=args.update_rounds,
        )
    except harness.UnsupportedScenario as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.scheme}-{args.scenario}"
    if args.format in ("json", "both"):
        (out_dir / f"{stem}-transcript.jsonl").write_text(result.transcript.to_jsonl())
        (out_dir / f"{stem}-cost.json").write_text(result.report.to_json())
    if args.format in ("csv", "both"):
        (out_dir / f"{stem}-comm.csv").write_text(result.report.comm_csv())
        (out_dir / f"{stem}-ops.csv").write_text(result.report.ops_csv())
    (out_dir / f"{stem}-transcript.bin").write_bytes(result.transcript.to_binary())

    if result.outcome.get("success"):
        print(f"handshake ok: {result.report.rounds} messages, "
              f"mobile bits {result.report.mobile_bits}")
        return EXIT_OK
    print(f"handshake failed: {result.outcome.get('abort', 'keys differ')}",
          file=sys.stderr)
    return EXIT_MISMATCH


# ---------------------------------------------------------------------------
# attack


def load_dictionary(path: Path) -> list[bytes]:
    """One candidate per line; lines of even-length hex are taken as raw
    bytes, anything else as UTF-8."""
    words: list[bytes] = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            words.append(bytes.fromhex(line))
        except ValueError:
            words.append(line.encode())
    return words


def cmd_attack(args) -> int:
    if args.attack not in attacks.ATTACK_NAMES:
        print(
            f"error: unknown attack {args.attack!r}; known: "
            + ", ".join(attacks.ATTACK_NAMES),
            file=sys.stderr,
        )
        return EXIT_USAGE
    suite = _suite_for(args.curve)
    if _is_toy(suite) and args.expect == "failure" and not args.allow_toy:
        print(
            "error: refusing a security assertion on the toy curve - its "
            "discrete logs are brute-forceable by design, so attack failure "
            "means nothing there (pass --allow-toy to override)",
            file=sys.stderr,
        )
        return EXIT_USAGE

    rng = random.Random(args.seed)
    adapter = attacks.make_adapter(args.scheme, suite, rng)
    dictionary = load_dictionary(Path(args.dict)) if args.dict else None
    outcome = attacks.run_attack(
        args.attack, adapter, rng,
        dictionary=dictionary, trials=args.trials, cdl=args.cdl_oracle,
    )

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(outcome.to_json())
    print(f"{outcome.attack} vs {outcome.scheme}: "
          f"{'succeeded' if outcome.succeeded else 'failed'} - {outcome.detail}")

    matches = outcome.succeeded == (args.expect == "success")
    return EXIT_OK if matches else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# report


REQUIRED_COSTS = (("proposed", "foreign-auth"), ("mun", "foreign-auth"))


def cmd_report(args) -> int:
    runs = Path(args.runs_dir)
    if not runs.is_dir():
        print(f"error: runs directory {runs} does not exist; run `roamauth "
              f"handshake` and `roamauth attack` first", file=sys.stderr)
        return EXIT_USAGE

    suite = _suite_for(args.curve)
    if _is_toy(suite) and not args.allow_toy:
        print("error: the functionality matrix asserts attack failures, which "
              "are meaningless on the toy curve (pass --allow-toy to override)",
              file=sys.stderr)
        return EXIT_USAGE

    cost_reports = {}
    missing: list[str] = []
    for scheme, scenario in REQUIRED_COSTS:
        path = runs / f"{scheme}-{scenario}-cost.json"
        if not path.exists():
            missing.append(str(path))
            continue
        cost_reports[scheme] = harness.CostReport.from_json(path.read_text())

    outcome_files = sorted(runs.glob("attack-*.json"))
    outcomes: dict[str, dict[str, attacks.AttackOutcome]] = {}
    for path in outcome_files:
        rec = json.loads(path.read_text())
        outcomes.setdefault(rec["attack"], {})[rec["scheme"]] = attacks.AttackOutcome(**rec)
    needed = [
        n for n in attacks.ATTACK_NAMES
        if n not in outcomes or any(s not in outcomes[n] for s in ("proposed", "mun"))
    ]
    if needed:
        missing.append(f"attack outcomes for: {', '.join(needed)}")
    if missing:
        print("error: missing prior run artifacts:\n  " + "\n  ".join(missing),
              file=sys.stderr)
        return EXIT_USAGE

    rng = random.Random(args.seed)
    features = harness.measure_features(suite, rng)
    matrix = harness.functionality_matrix(outcomes, features)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        comm = "\n".join(cost_reports[s].comm_csv() for s in ("proposed", "mun"))
        ops = "\n".join(cost_reports[s].ops_csv() for s in ("proposed", "mun"))
        (out_dir / "table3_communication.csv").write_text(comm)
        (out_dir / "table4_operations.csv").write_text(ops)
        (out_dir / "table5_functionality.csv").write_text(matrix.to_csv())
    if args.format in ("json", "both"):
        (out_dir / "table5_functionality.json").write_text(matrix.to_json())
        summary = {
            s: json.loads(cost_reports[s].to_json()) for s in cost_reports
        }
        (out_dir / "cost_summary.json").write_text(json.dumps(summary, indent=2))

    for scheme, rep in cost_reports.items():
        print(f"{scheme}: rounds={rep.rounds} (paper {rep.paper_rounds}), "
              f"mobile bits={rep.mobile_bits} (paper {rep.paper_bits}, "
              f"delta {rep.bits_delta})")
    flagged = [r["label"] for r in matrix.rows if r["flag"]]
    print(f"functionality rows flagged: {flagged if flagged else 'none'}")
    print(f"report written to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="roamauth",
        description="Roaming-authentication protocol engine and attack harness",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, curve_default=None):
        sp.add_argument("--seed", type=int, default=0, help="deterministic run seed")
        sp.add_argument("--curve", choices=sorted(ec.PROFILES),
                        default=curve_default, help="curve profile")

    sp = sub.add_parser("register", help="register a user and write a card file")
    common(sp)
    sp.add_argument("--id", required=True, help="user label")
    sp.add_argument("--password", required=True)
    sp.add_argument("--out", required=True, help="card file path")
    sp.add_argument("--force", action="store_true", help="overwrite existing card file")
    sp.set_defaults(fn=cmd_register)

    sp = sub.add_parser("handshake", help="run one protocol scenario")
    common(sp)
    sp.add_argument("--scheme", choices=harness.SCHEMES, default="proposed")
    sp.add_argument("--scenario", choices=harness.SCENARIOS, default="foreign-auth")
    sp.add_argument("--scenario-file",
                    help="declarative scenario JSON (overrides scheme/scenario/seed/curve)")
    sp.add_argument("--card", help="card file from `register` (proposed scheme)")
    sp.add_argument("--password", help="password for --card logins")
    sp.add_argument("--update-rounds", type=int, default=1)
    sp.add_argument("--tamper", help="message kind to flip one byte of in flight")
    sp.add_argument("--out", default="runs", help="output directory")
    sp.add_argument("--format", choices=("json", "csv", "both"), default="both")
    sp.set_defaults(fn=cmd_handshake)

    sp = sub.add_parser("attack", help="run one adversary strategy")
    common(sp)
    sp.add_argument("--attack", required=True)
    sp.add_argument("--scheme", choices=harness.SCHEMES, required=True)
    sp.add_argument("--expect", choices=("success", "failure"), required=True)
    sp.add_argument("--dict", help="dictionary file (one candidate per line)")
    sp.add_argument("--trials", type=int, default=200,
                    help="trials for the traceability game")
    sp.add_argument("--cdl-oracle", action="store_true",
                    help="grant the small-group discrete-log oracle (toy curve)")
    sp.add_argument("--allow-toy", action="store_true",
                    help="permit security assertions on the toy curve")
    sp.add_argument("--out", help="outcome JSON path")
    sp.set_defaults(fn=cmd_attack)

    sp = sub.add_parser("report", help="assemble comparison tables from run artifacts")
    common(sp)
    sp.add_argument("--runs-dir", default="runs", help="directory with prior artifacts")
    sp.add_argument("--out", default="report", help="output directory")
    sp.add_argument("--format", choices=("json", "csv", "both"), default="both")
    sp.add_argument("--allow-toy", action="store_true")
    sp.set_defaults(fn=cmd_report)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
