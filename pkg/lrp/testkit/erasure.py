from typing import List

from lrp.lang.ast import (
    INTERNAL_NODES,
    EraseProp,
    Extract,
    Func,
    GetProp,
    IfHas,
    MonoRef,
    PropertiedType,
    SetProp,
    annotations,
    pretty,
    pretty_type,
    walk,
)
from lrp.lang.transformer import TransformResult

PROPERTY_NODES = (SetProp, GetProp, EraseProp, Extract, IfHas, Func)


def erasure_violations(tr: TransformResult) -> List[str]:
    """
    List what keeps a transformed program from being property-free.

    Checked for the program and every monomorphization body: no
    property construct, no function definition, no propertied value and
    no propertied annotation.
    """
    problems: List[str] = []
    if isinstance(tr.type, PropertiedType):
        problems.append(f"program type is propertied: {pretty_type(tr.type)}")
    bodies = [("program", tr.expr)] + [
        (f"{mono.name}[{mono.index}]", mono.body) for mono in tr.delta.monos.values()
    ]
    for where, body in bodies:
        for node in walk(body):
            if isinstance(node, PROPERTY_NODES):
                problems.append(f"{where}: {type(node).__name__} in {pretty(node)}")
            elif isinstance(node, INTERNAL_NODES) and not isinstance(node, MonoRef):
                problems.append(f"{where}: internal node {pretty(node)}")
        for annotation in annotations(body):
            if isinstance(annotation, PropertiedType):
                problems.append(f"{where}: propertied annotation")
    for mono in tr.delta.monos.values():
        if isinstance(mono.param_type, PropertiedType):
            problems.append(f"{mono.name}[{mono.index}]: propertied parameter type")
    return problems
