"""Sketch-and-complete synthesis of aggregation queries from examples.

The search keeps a FIFO worklist of sketches (operator spines). Each dequeued
sketch is first screened by abstract deduction: the observed output must be a
possible instance of some abstract collection the sketch can produce, both in
document type (placeholder matching) and in collection size (chain formula
satisfiability). Feasible sketches are handed to an enumerative completer
that instantiates arguments stage by stage, evaluating concretely on every
example as it goes and accepting the first full query that reproduces every
output exactly.

Enumeration order is load-bearing for reproducibility: candidates are tried
in the documented tier order and the first satisfying query wins, so any
reordering changes which of several observationally equal queries is
returned. The orders are fixed as follows.

  predicates   True, False; Exists per path; SizeEq (constant-major, then
               path); comparisons constant-major, then path, then op in
               (=, <, <=, >, >=, !=); negations of discovered class
               representatives; And then Or over representative pairs.
               Classes are truth vectors over all stage documents.
  constants    user-supplied, then numeric values in output-encounter
               order, then null, 0, 1; first occurrence kept.
  add fields   target sets ascending by size; per target equal-typed paths,
               then arithmetic (left path, op, right path), then unary math
               functions; per-target dedup by value vector.
  group        key sets descending by size (lexicographic within a size),
               aggregate-name sets ascending with the empty set first,
               aggregators Count, Sum, Avg, Min, Max per name, argument
               paths drawn from top-level numeric attributes.
  unwind       array-typed paths, lexicographic.
  lookup       foreign collections in schema order, output array attributes,
               then (local, foreign) path pairs of equal primitive type.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field, replace
from itertools import combinations, product

from .absint import OPERATOR_TAGS, Sketch, abs_eval, sketch_formula
from .abstraction import abstract_db_of, concretizes
from .errors import EvalError, TaskError
from .interp import apply_stage, eval_agg, eval_expr, eval_pred
from .lang import (
    AddFields, And, Arith, Avg, Cmp, CollectionRef, Count, Exists, FALSE,
    FnCall, Group, Lookup, Match, Max, Min, Not, Or, PathExpr, Project,
    SizeEq, Sum, TRUE, Unwind, ast_size,
)
from .sizes import is_sat
from .types import ArrayT, DocT, NUM, conforms, doc_paths, infer_value_type, type_of_path
from .values import ABSENT, collection_eq, get_path, kind_of, value_key

_PRIMITIVE_KINDS = ("null", "num", "str", "bool", "datetime", "objectid")
_CMP_ORDER = ("=", "<", "<=", ">", ">=", "!=")


@dataclass(frozen=True)
class SynthesisConfig:
    timeout_seconds: float = 300.0
    max_pipeline_depth: int = 6
    max_group_keys: int = 2
    max_predicate_atoms: int = 2
    math_fns: tuple = ("abs", "floor", "ceil")
    disable_size_abstraction: bool = False
    disable_type_abstraction: bool = False

    def __post_init__(self):
        if self.timeout_seconds <= 0:
            raise TaskError("timeout_seconds must be positive")
        for name in ("max_pipeline_depth", "max_group_keys", "max_predicate_atoms"):
            if getattr(self, name) < 1:
                raise TaskError(f"{name} must be at least 1")
        for fn in self.math_fns:
            if fn not in ("abs", "floor", "ceil"):
                raise TaskError(f"unknown math function {fn!r}")


@dataclass(frozen=True)
class Example:
    input: dict
    output: list


@dataclass(frozen=True)
class SynthesisTask:
    schema: dict
    collection: str
    examples: tuple
    constants: tuple = ()

    def __post_init__(self):
        if not self.examples:
            raise TaskError("at least one example is required")
        if self.collection not in self.schema:
            raise TaskError(f"collection {self.collection!r} not in schema")
        for i, ex in enumerate(self.examples):
            for name, coll_type in self.schema.items():
                docs = ex.input.get(name, [])
                if not conforms(docs, coll_type):
                    raise TaskError(f"examples[{i}].input[{name!r}] does not conform to the schema")


@dataclass
class SynthesisResult:
    query: object
    status: str  # success | timeout | exhausted
    stats: dict = field(default_factory=dict)


class _DeadlineReached(Exception):
    pass


def refine(sk: Sketch):
    """The six sketches wrapping a fresh operator around the leaf."""
    return [Sketch(sk.collection, (tag,) + sk.ops) for tag in OPERATOR_TAGS]


# ---------------------------------------------------------------------------
# Lenient typing of intermediate collections.
#
# Candidate enumeration only needs paths and rough types; attributes whose
# values disagree in kind (or that are only ever null / empty arrays) are
# silently dropped rather than failing the whole stage. Any imprecision is
# harmless because every candidate query is verified exactly.
# ---------------------------------------------------------------------------

def lenient_doc_type(docs):
    attrs = {}  # name -> list of non-absent values
    order = []
    for d in docs:
        for name, v in d.items():
            if name not in attrs:
                attrs[name] = []
                order.append(name)
            attrs[name].append(v)
    fields = []
    for name in order:
        t = _lenient_value_type(attrs[name])
        if t is not None:
            fields.append((name, t))
    return DocT(fields)


def _lenient_value_type(values):
    kinds = {kind_of(v) for v in values if v is not None}
    if len(kinds) != 1:
        return None
    kind = kinds.pop()
    if kind == "doc":
        return lenient_doc_type([v for v in values if v is not None])
    if kind == "array":
        elems = [e for v in values if v is not None for e in v]
        if not elems:
            return None
        try:
            inner = infer_value_type(elems[0])
        except Exception:
            inner = None
        for e in elems:
            try:
                if infer_value_type(e) != inner:
                    return None
            except Exception:
                return None
        return ArrayT(inner) if inner is not None else None
    try:
        return infer_value_type(values[0])
    except Exception:
        return None


def output_doc_type(examples):
    return lenient_doc_type([d for ex in examples for d in ex.output])


# ---------------------------------------------------------------------------
# Deduction
# ---------------------------------------------------------------------------

def deduce(schema, sk: Sketch, examples, cfg: SynthesisConfig, pre=None) -> bool:
    if cfg.disable_size_abstraction and cfg.disable_type_abstraction:
        return True
    pre = pre or _precompute(schema, examples)
    if cfg.disable_type_abstraction:
        # size reasoning alone: the chain formula is determined by the spine
        for adb, out_type, out_docs, out_size in pre:
            f = sketch_formula(sk, adb[sk.collection].formula)
            if not is_sat(f, probe=out_size):
                return False
        return True
    for adb, out_type, out_docs, out_size in pre:
        lam = abs_eval(adb, out_type, sk, cfg.max_group_keys)
        if not any(
            concretizes(
                out_docs, ac,
                doc_type=out_type if out_docs else None,
                check_size=not cfg.disable_size_abstraction,
            )
            for ac in lam
        ):
            return False
    return True


def _precompute(schema, examples):
    pre = []
    for ex in examples:
        adb = abstract_db_of(ex.input, schema)
        out_type = lenient_doc_type(ex.output)
        pre.append((adb, out_type, ex.output, len(ex.output)))
    return pre


# ---------------------------------------------------------------------------
# Predicate enumeration
# ---------------------------------------------------------------------------

def constant_pool(constants, examples):
    pool = []
    seen = set()

    def add(v):
        k = (kind_of(v), value_key(v))
        if k not in seen:
            seen.add(k)
            pool.append(v)

    for c in constants:
        add(c)
    # numeric output values are hints; string and other literals must be
    # supplied by the user
    for ex in examples:
        for doc in ex.output:
            for v in _primitive_leaves(doc):
                if kind_of(v) == "num":
                    add(v)
    for extra in (None, 0, 1):
        add(extra)
    return pool


def _primitive_leaves(v):
    kind = kind_of(v)
    if kind == "doc":
        for child in v.values():
            yield from _primitive_leaves(child)
    elif kind == "array":
        for child in v:
            yield from _primitive_leaves(child)
    elif kind != "null":
        yield v


def enumerate_predicates(docs, paths, constants, cfg, in_type=None):
    """Lazily yield one representative per truth-equivalence class."""
    seen = {}
    reps = []

    def vector(p):
        bits = 0
        for d in docs:
            bits = (bits << 1) | (1 if eval_pred(d, p) else 0)
        return bits

    def emit(p):
        v = vector(p)
        if v in seen:
            return None
        seen[v] = p
        reps.append((p, v))
        return p

    for atom in _atom_order(paths, constants, in_type):
        p = emit(atom)
        if p is not None:
            yield p
    # negations of the representatives discovered so far
    full = (1 << len(docs)) - 1
    for p, v in list(reps):
        nv = full & ~v
        if nv not in seen:
            np = Not(p)
            seen[nv] = np
            reps.append((np, nv))
            yield np
    # connectives over representative literals, by total atom count
    if cfg.max_predicate_atoms >= 2:
        by_atoms = {1: list(reps)}
        for total in range(2, cfg.max_predicate_atoms + 1):
            level = []
            for left_n in range(1, total):
                right_n = total - left_n
                if left_n > right_n:
                    break
                for (lp, lv) in by_atoms.get(left_n, []):
                    for (rp, rv) in by_atoms.get(right_n, []):
                        for build, bv in ((And, lv & rv), (Or, lv | rv)):
                            if bv not in seen:
                                p = build(lp, rp)
                                seen[bv] = p
                                level.append((p, bv))
                                yield p
            by_atoms[total] = level


def _atom_order(paths, constants, in_type):
    yield TRUE
    yield FALSE
    for h in paths:
        yield Exists(h)
    array_paths = [
        h for h in paths
        if in_type is None or isinstance(type_of_path(in_type, h), ArrayT)
    ]
    for c in constants:
        if isinstance(c, int) and not isinstance(c, bool) and c >= 0:
            for h in array_paths:
                yield SizeEq(h, c)
    for c in constants:
        c_kind = kind_of(c)
        for h in paths:
            if in_type is not None:
                t = type_of_path(in_type, h)
                if c_kind != "null" and _KIND_OF_TYPE.get(type(t).__name__) != c_kind:
                    continue
            ops = ("=", "!=") if c_kind == "null" else _CMP_ORDER
            for op in ops:
                yield Cmp(h, op, c)


_KIND_OF_TYPE = {
    "NumT": "num", "StringT": "str", "BoolT": "bool",
    "DatetimeT": "datetime", "ObjectIdT": "objectid",
}


# ---------------------------------------------------------------------------
# Per-operator candidate generators. Each yields operator nodes whose source
# is a dummy reference; the completer rebinds sources during assembly.
# ---------------------------------------------------------------------------

_HOLE = CollectionRef("_")


def _common_paths(tin: DocT, tout: DocT, prefix=()):
    out = []
    for name, ot in tout.fields:
        it = tin.get(name)
        if it is None:
            continue
        path = prefix + (name,)
        if it == ot:
            out.append(path)
        elif isinstance(it, DocT) and isinstance(ot, DocT):
            out.extend(_common_paths(it, ot, path))
    return sorted(out)


def _gen_project(state):
    paths = _common_paths(state.in_type, state.out_type)
    if paths:
        yield Project(_HOLE, tuple(paths))


def _gen_match(state):
    paths = doc_paths(state.in_type)
    for pred in enumerate_predicates(state.docs, paths, state.pool, state.cfg, state.in_type):
        yield Match(_HOLE, pred)


def _gen_unwind(state):
    for path in doc_paths(state.in_type):
        if isinstance(type_of_path(state.in_type, path), ArrayT):
            yield Unwind(_HOLE, path)


def _absent_targets(tin: DocT, tout: DocT, prefix=()):
    out = []
    for name, ot in tout.fields:
        path = prefix + (name,)
        it = tin.get(name)
        if it is None:
            out.append(path)
        elif isinstance(it, DocT) and isinstance(ot, DocT):
            out.extend(_absent_targets(it, ot, path))
    return sorted(out)


def _expr_candidates(state, target):
    """Type-correct expressions for one new attribute, deduped by values."""
    want = type_of_path(state.out_type, target)
    num_paths = [p for p in doc_paths(state.in_type) if type_of_path(state.in_type, p) == NUM]
    seen = {}

    def emit(e):
        vec = tuple(value_key(eval_expr(d, e)) for d in state.docs)
        if vec in seen:
            return None
        seen[vec] = e
        return e

    for p in doc_paths(state.in_type):
        if type_of_path(state.in_type, p) == want:
            e = emit(PathExpr(p))
            if e is not None:
                yield e
    if want == NUM:
        for p1 in num_paths:
            for op in ("+", "-", "*", "/", "%"):
                for p2 in num_paths:
                    e = emit(Arith(p1, op, p2))
                    if e is not None:
                        yield e
        for fn in state.cfg.math_fns:
            for p in num_paths:
                e = emit(FnCall(fn, p))
                if e is not None:
                    yield e


def _gen_add_fields(state):
    targets = _absent_targets(state.in_type, state.out_type)
    if not targets:
        return
    for size in range(1, len(targets) + 1):
        for subset in combinations(targets, size):
            pools = [list(_expr_candidates(state, t)) for t in subset]
            if any(not pool for pool in pools):
                continue
            for combo in product(*pools):
                yield AddFields(_HOLE, subset, combo)


def _gen_group(state):
    paths = doc_paths(state.in_type)
    if not paths:
        return
    num_out_attrs = [
        name for name, t in state.out_type.fields if t == NUM and name != "_id"
    ]
    # accumulator arguments range over top-level numeric attributes only,
    # matching the top-level rule Unwind already follows
    num_paths = [(name,) for name, t in state.in_type.fields if t == NUM]
    first_docs = state.first_docs
    output_nums = state.output_nums

    max_size = min(state.cfg.max_group_keys, len(paths))
    for size in range(max_size, 0, -1):
        for keys in combinations(paths, size):
            if len({k[-1] for k in keys}) != size:
                continue
            groups = _group_members(first_docs, keys)
            if first_docs and len(groups) >= len(first_docs):
                continue
            agg_pool = [Count()]
            agg_pool += [make(p) for make in (Sum, Avg, Min, Max) for p in num_paths]
            kept = [
                a for a in agg_pool
                if _agg_plausible(a, groups, output_nums)
            ]
            for nsize in range(0, len(num_out_attrs) + 1):
                for names in combinations(num_out_attrs, nsize):
                    if not names:
                        yield Group(_HOLE, keys, (), ())
                        continue
                    if not kept:
                        continue
                    for aggs in product(kept, repeat=len(names)):
                        yield Group(_HOLE, keys, names, aggs)


def _group_members(docs, keys):
    groups = {}
    for d in docs:
        gk = tuple(value_key(None if (v := get_path(d, k)) is ABSENT else v) for k in keys)
        groups.setdefault(gk, []).append(d)
    return list(groups.values())


def _agg_plausible(agg, groups, output_nums):
    """Keep an accumulator only if one of its group values shows up in the output."""
    if not groups:
        return True
    for members in groups:
        v = eval_agg(members, agg)
        if v is not None and kind_of(v) == "num" and value_key(v) in output_nums:
            return True
    return False


def _gen_lookup(state):
    in_paths = doc_paths(state.in_type)
    for fname, coll_type in state.schema.items():
        ftype = coll_type.elem
        for as_attr, ot in state.out_type.fields:
            if not isinstance(ot, ArrayT) or ot.elem != ftype:
                continue
            if state.in_type.get(as_attr) is not None:
                continue
            fpaths = doc_paths(ftype)
            for local in in_paths:
                lt = type_of_path(state.in_type, local)
                if type(lt).__name__ not in _KIND_OF_TYPE:
                    continue
                for foreign in fpaths:
                    if type_of_path(ftype, foreign) == lt:
                        yield Lookup(_HOLE, local, foreign, fname, as_attr)


_GENERATORS = {
    "project": _gen_project,
    "match": _gen_match,
    "add_fields": _gen_add_fields,
    "unwind": _gen_unwind,
    "group": _gen_group,
    "lookup": _gen_lookup,
}


@dataclass
class _StageState:
    docs: list            # all current documents across examples, in order
    in_type: DocT
    out_type: DocT
    pool: list
    cfg: SynthesisConfig
    schema: dict
    first_docs: list      # first example's current documents
    output_nums: set


# ---------------------------------------------------------------------------
# Completion
# ---------------------------------------------------------------------------

def complete_sketch(schema, sk: Sketch, examples, cfg: SynthesisConfig,
                    constants=(), deadline=None, counter=None):
    counter = counter if counter is not None else [0]
    out_type = output_doc_type(examples)
    pool = constant_pool(constants, examples)
    output_nums = {
        value_key(v)
        for v in _primitive_leaves({"_": examples[0].output})
        if kind_of(v) == "num"
    }
    inputs = [list(ex.input.get(sk.collection, [])) for ex in examples]
    outputs = [ex.output for ex in examples]
    dbs = [ex.input for ex in examples]
    n = len(sk.ops)
    chosen = [None] * n

    def check_deadline():
        if deadline is not None and time.monotonic() > deadline:
            raise _DeadlineReached()

    def fill(k, colls):
        if k == n:
            counter[0] += 1
            if all(collection_eq(c, o) for c, o in zip(colls, outputs)):
                return _assemble(sk.collection, chosen)
            return None
        state = _StageState(
            docs=[d for c in colls for d in c],
            in_type=lenient_doc_type([d for c in colls for d in c]),
            out_type=out_type,
            pool=pool,
            cfg=cfg,
            schema=schema,
            first_docs=list(colls[0]),
            output_nums=output_nums,
        )
        for cand in _GENERATORS[sk.ops[k]](state):
            check_deadline()
            try:
                nxt = [apply_stage(db, coll, cand) for db, coll in zip(dbs, colls)]
            except EvalError:
                continue
            if isinstance(cand, Group) and any(
                coll and len(new) >= len(coll) for coll, new in zip(colls, nxt)
            ):
                # grouping must merge something; the size reasoning that
                # admitted this spine assumed a strict decrease per stage
                continue
            chosen[k] = cand
            got = fill(k + 1, nxt)
            if got is not None:
                return got
        return None

    return fill(0, inputs)


def _assemble(collection, stage_nodes):
    q = CollectionRef(collection)
    for node in stage_nodes:
        q = replace(node, source=q)
    return q


# ---------------------------------------------------------------------------
# The worklist loop
# ---------------------------------------------------------------------------

def synthesize(task: SynthesisTask, cfg: SynthesisConfig = None, trace=None) -> SynthesisResult:
    cfg = cfg or SynthesisConfig()
    start = time.monotonic()
    deadline = start + cfg.timeout_seconds
    pre = _precompute(task.schema, task.examples)
    worklist = deque([Sketch(task.collection, ())])
    sketches = 0
    counter = [0]

    def result(query, status):
        return SynthesisResult(query, status, {
            "sketchesExplored": sketches,
            "programsCompleted": counter[0],
            "astSize": ast_size(query) if query is not None else 0,
            "elapsedSeconds": time.monotonic() - start,
        })

    while worklist:
        if time.monotonic() > deadline:
            return result(None, "timeout")
        sk = worklist.popleft()
        sketches += 1
        feasible = deduce(task.schema, sk, task.examples, cfg, pre)
        if trace is not None:
            trace(sk, feasible)
        if feasible:
            try:
                q = complete_sketch(task.schema, sk, task.examples, cfg,
                                    task.constants, deadline, counter)
            except _DeadlineReached:
                return result(None, "timeout")
            if q is not None:
                return result(q, "success")
        if sk.depth < cfg.max_pipeline_depth:
            worklist.extend(refine(sk))
    return result(None, "exhausted")
