"""The three-element knowledge base: scenario, component and conditions per idiom.

This module is data only. Extraction interprets it.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import NodeKind


class IdiomKind(str, enum.Enum):
    LIST_COMPREHENSION = "list-comprehension"
    SET_COMPREHENSION = "set-comprehension"
    DICT_COMPREHENSION = "dict-comprehension"
    CHAIN_COMPARISON = "chain-comparison"
    TRUTH_TEST = "truth-test"
    LOOP_ELSE = "loop-else"
    ASSIGN_MULTI_TARGETS = "assign-multi-targets"
    FOR_MULTI_TARGETS = "for-multi-targets"
    STAR_IN_FUNC_CALL = "star-in-func-call"
    WITH = "with"
    ENUMERATE = "enumerate"
    CHAIN_ASSIGN_SAME_VALUE = "chain-assign-same-value"
    FSTRING = "fstring"

    @classmethod
    def parse(cls, name: str) -> "IdiomKind":
        """Accept ``chain-comparison``, ``ChainComparison`` or ``CHAIN_COMPARISON``."""
        key = "".join(ch for ch in name.lower() if ch.isalnum())
        for kind in cls:
            if key in (kind.value.replace("-", ""), kind.name.replace("_", "").lower()):
                return kind
        raise ValueError(f"unknown idiom {name!r}")


class Origin(str, enum.Enum):
    CORE = "core"
    SUPPLEMENTARY = "supplementary"


class ConditionId(enum.Enum):
    # (description, origin)
    HAS_APPEND_CALL = ("The For node has an 'append' function call", Origin.CORE)
    HAS_ADD_CALL = ("The For node has an 'add' function call", Origin.CORE)
    CALL_RECEIVER_IS_ASSIGNED = (
        "The function name of the append/add call is the assigned variable of the Assign node",
        Origin.CORE,
    )
    HAS_SUBSCRIPT_ASSIGN = (
        "The For node has an assign statement whose assigned variable is a Subscript node",
        Origin.CORE,
    )
    SUBSCRIPT_VALUE_IS_ASSIGNED = (
        "The value of the Subscript node is the assigned variable of the Assign node",
        Origin.CORE,
    )
    INIT_IS_EMPTY_AND_ADJACENT = (
        "The Assign node binds an empty collection of the right flavor and immediately precedes the For node",
        Origin.SUPPLEMENTARY,
    )
    TARGET_WRITTEN_ONLY_BY_LOOP_EFFECT = (
        "The accumulated variable is touched by the loop only through its single append/add/store",
        Origin.SUPPLEMENTARY,
    )
    OPERANDS_INTERSECT = ("Compare operands of the two Compare nodes intersect", Origin.CORE)
    OP_IS_EQ_OR_NE = ("The op of the Compare node is '==' or '!='", Origin.CORE)
    OPERAND_IN_EMPTY_SET = ("One comparison operand belongs to EmptySet", Origin.CORE)
    LOOP_HAS_BREAK = ("The For/While node has break statements", Origin.CORE)
    IF_IS_NEXT_STATEMENT = ("The If node is the next statement of the loop node", Origin.CORE)
    IF_NEGATES_BREAK_GUARD = (
        "The If test is the syntactic negation of the loop's unique break guard, and neither node has an else",
        Origin.SUPPLEMENTARY,
    )
    NO_CROSS_DEPENDENCY = (
        "Each statement is a single-target simple assignment whose value does not reference an earlier target",
        Origin.SUPPLEMENTARY,
    )
    BODY_HAS_SUBSCRIPT = ("The body of the For node has a Subscript node", Origin.CORE)
    SUBSCRIPT_VALUE_IS_LOOP_VAR = (
        "The value of the Subscript node is the iterated variable of the For node",
        Origin.CORE,
    )
    INDICES_NON_NEGATIVE_LITERALS = (
        "Every use of the loop variable is a load subscripted by a non-negative integer literal",
        Origin.SUPPLEMENTARY,
    )
    SAME_SUBSCRIPT_VALUE = ("The values of the Subscript nodes are the same", Origin.CORE)
    STAR_INDICES_VALID = (
        "Subscript indices form a step-1 ascending run over one base without crossing from negative to non-negative",
        Origin.SUPPLEMENTARY,
    )
    CALLEE_NAME_IS_OPEN = ("The function name of the Call node is 'open'", Origin.CORE)
    OPEN_RESULT_CONSUMED_IN_STATEMENT = (
        "The open() result is consumed eagerly inside one simple statement and is not stored, returned or already managed",
        Origin.SUPPLEMENTARY,
    )
    ITER_NOT_ALREADY_ENUMERATE = (
        "The iterated object is not a function call whose function name is 'enumerate'",
        Origin.CORE,
    )
    RANGE_LEN_ITERATION = (
        "The loop iterates range(len(X)) for a name or attribute X that the body does not rebind or resize",
        Origin.SUPPLEMENTARY,
    )
    INDEXED_ACCESS_IN_BODY = ("The body reads X[i] with the loop index", Origin.SUPPLEMENTARY)
    SAME_VALUES = ("The values of consecutive Assign nodes are the same", Origin.CORE)
    IMMUTABLE_LITERAL_VALUE = (
        "The shared value is an immutable literal (None, True, False, number, string)",
        Origin.SUPPLEMENTARY,
    )
    OP_IS_MOD = ("The op of the BinOp node is '%'", Origin.CORE)
    LEFT_IS_STR_LITERAL = ("The left operand of '%' is a str literal", Origin.SUPPLEMENTARY)

    @property
    def description(self) -> str:
        return self.value[0]

    @property
    def origin(self) -> Origin:
        return self.value[1]


@dataclass(frozen=True)
class ScenarioPattern:
    description: str
    node_kind: Optional[NodeKind] = None
    constraints: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class SingleNode:
    kind: NodeKind


@dataclass(frozen=True)
class NodePair:
    kind_a: tuple[NodeKind, ...]
    kind_b: tuple[NodeKind, ...]
    adjacency: str


@dataclass(frozen=True)
class ConsecutiveRun:
    kind: NodeKind
    min_len: int = 2


ComponentPattern = Union[SingleNode, NodePair, ConsecutiveRun]


class AbstractionMode(str, enum.Enum):
    SPECIFIED_OBJECT = "specified-object"
    OPERAND_MAPPING = "operand-mapping"
    NO_ABSTRACTION = "no-abstraction"


@dataclass(frozen=True)
class IdiomSpec:
    kind: IdiomKind
    scenario: Optional[ScenarioPattern]
    component: ComponentPattern
    conditions: tuple[ConditionId, ...]
    abstraction_mode: AbstractionMode
    description: str = field(default="", compare=False)

    @property
    def core_conditions(self) -> tuple[ConditionId, ...]:
        return tuple(c for c in self.conditions if c.origin is Origin.CORE)


C = ConditionId
K = NodeKind
_FOR_ASSIGN = NodePair((K.FOR,), (K.ASSIGN,), "assign-immediately-precedes-for")

_CATALOG: tuple[IdiomSpec, ...] = (
    IdiomSpec(
        IdiomKind.LIST_COMPREHENSION,
        None,
        _FOR_ASSIGN,
        (C.HAS_APPEND_CALL, C.CALL_RECEIVER_IS_ASSIGNED, C.INIT_IS_EMPTY_AND_ADJACENT,
         C.TARGET_WRITTEN_ONLY_BY_LOOP_EFFECT),
        AbstractionMode.NO_ABSTRACTION,
        "Use one line to append elements to a list",
    ),
    IdiomSpec(
        IdiomKind.SET_COMPREHENSION,
        None,
        _FOR_ASSIGN,
        (C.HAS_ADD_CALL, C.CALL_RECEIVER_IS_ASSIGNED, C.INIT_IS_EMPTY_AND_ADJACENT,
         C.TARGET_WRITTEN_ONLY_BY_LOOP_EFFECT),
        AbstractionMode.NO_ABSTRACTION,
        "Use one line to add elements to a set",
    ),
    IdiomSpec(
        IdiomKind.DICT_COMPREHENSION,
        None,
        _FOR_ASSIGN,
        (C.HAS_SUBSCRIPT_ASSIGN, C.SUBSCRIPT_VALUE_IS_ASSIGNED, C.INIT_IS_EMPTY_AND_ADJACENT,
         C.TARGET_WRITTEN_ONLY_BY_LOOP_EFFECT),
        AbstractionMode.NO_ABSTRACTION,
        "Use one line to store items into a dict",
    ),
    IdiomSpec(
        IdiomKind.CHAIN_COMPARISON,
        ScenarioPattern("A BoolOp node whose op is 'and'", K.BOOLOP, (("op", "and"),)),
        NodePair((K.COMPARE,), (K.COMPARE,), "both-direct-operands-of-scenario"),
        (C.OPERANDS_INTERSECT,),
        AbstractionMode.OPERAND_MAPPING,
        "Chain multiple comparison expressions into one comparison expression",
    ),
    IdiomSpec(
        IdiomKind.TRUTH_TEST,
        ScenarioPattern("A test-type node", None, (("position", "test"),)),
        SingleNode(K.COMPARE),
        (C.OP_IS_EQ_OR_NE, C.OPERAND_IN_EMPTY_SET),
        AbstractionMode.NO_ABSTRACTION,
        "Directly check the truthiness of an object",
    ),
    IdiomSpec(
        IdiomKind.LOOP_ELSE,
        None,
        NodePair((K.FOR, K.WHILE), (K.IF,), "if-is-next-statement"),
        (C.LOOP_HAS_BREAK, C.IF_IS_NEXT_STATEMENT, C.IF_NEGATES_BREAK_GUARD),
        AbstractionMode.NO_ABSTRACTION,
        "A loop statement has an else clause",
    ),
    IdiomSpec(
        IdiomKind.ASSIGN_MULTI_TARGETS,
        None,
        ConsecutiveRun(K.ASSIGN),
        (C.NO_CROSS_DEPENDENCY,),
        AbstractionMode.NO_ABSTRACTION,
        "Assign multiple values to multiple variables in one assign statement",
    ),
    IdiomSpec(
        IdiomKind.FOR_MULTI_TARGETS,
        None,
        SingleNode(K.FOR),
        (C.BODY_HAS_SUBSCRIPT, C.SUBSCRIPT_VALUE_IS_LOOP_VAR, C.INDICES_NON_NEGATIVE_LITERALS),
        AbstractionMode.SPECIFIED_OBJECT,
        "Unpack the iterated target of a for statement",
    ),
    IdiomSpec(
        IdiomKind.STAR_IN_FUNC_CALL,
        ScenarioPattern("A Call node", K.CALL),
        ConsecutiveRun(K.SUBSCRIPT),
        (C.SAME_SUBSCRIPT_VALUE, C.STAR_INDICES_VALID),
        AbstractionMode.SPECIFIED_OBJECT,
        "Unpack an iterable to the positional arguments in a function call",
    ),
    IdiomSpec(
        IdiomKind.WITH,
        None,
        SingleNode(K.CALL),
        (C.CALLEE_NAME_IS_OPEN, C.OPEN_RESULT_CONSUMED_IN_STATEMENT),
        AbstractionMode.NO_ABSTRACTION,
        "Automatically close a file after it has been opened",
    ),
    IdiomSpec(
        IdiomKind.ENUMERATE,
        None,
        SingleNode(K.FOR),
        (C.ITER_NOT_ALREADY_ENUMERATE, C.RANGE_LEN_ITERATION, C.INDEXED_ACCESS_IN_BODY),
        AbstractionMode.SPECIFIED_OBJECT,
        "Iterate over index and value together",
    ),
    IdiomSpec(
        IdiomKind.CHAIN_ASSIGN_SAME_VALUE,
        None,
        ConsecutiveRun(K.ASSIGN),
        (C.SAME_VALUES, C.IMMUTABLE_LITERAL_VALUE),
        AbstractionMode.NO_ABSTRACTION,
        "Assign a value to multiple variables",
    ),
    IdiomSpec(
        IdiomKind.FSTRING,
        None,
        SingleNode(K.BINOP),
        (C.OP_IS_MOD, C.LEFT_IS_STR_LITERAL),
        AbstractionMode.NO_ABSTRACTION,
        "Combine values into a string with an f-string",
    ),
)

_BY_KIND = {spec.kind: spec for spec in _CATALOG}


def catalog() -> list[IdiomSpec]:
    return list(_CATALOG)


def spec_for(kind: IdiomKind) -> IdiomSpec:
    return _BY_KIND[IdiomKind(kind)]


def catalog_index(kind: IdiomKind) -> int:
    return _CATALOG.index(_BY_KIND[kind])


def _component_json(component: ComponentPattern) -> dict:
    if isinstance(component, SingleNode):
        return {"shape": "SingleNode", "kind": component.kind.value}
    if isinstance(component, NodePair):
        return {
            "shape": "NodePair",
            "kind_a": [k.value for k in component.kind_a],
            "kind_b": [k.value for k in component.kind_b],
            "adjacency": component.adjacency,
        }
    return {"shape": "ConsecutiveRun", "kind": component.kind.value, "min_len": component.min_len}


def catalog_json(indent: Optional[int] = 2) -> str:
    doc = []
    for spec in _CATALOG:
        scenario = None
        if spec.scenario is not None:
            scenario = {
                "description": spec.scenario.description,
                "node_kind": spec.scenario.node_kind.value if spec.scenario.node_kind else None,
                "constraints": dict(spec.scenario.constraints),
            }
        doc.append(
            {
                "kind": spec.kind.value,
                "description": spec.description,
                "scenario": scenario,
                "component": _component_json(spec.component),
                "conditions": [
                    {"id": c.name, "description": c.description, "origin": c.origin.value}
                    for c in spec.conditions
                ],
                "abstraction_mode": spec.abstraction_mode.value,
            }
        )
    return json.dumps(doc, indent=indent)
