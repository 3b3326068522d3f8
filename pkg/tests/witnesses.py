"""Minimal premise sets, one per rule, with the hand-traced closure of each."""

from __future__ import annotations

from seamtrace.elements import ElementKind as K
from seamtrace.relations import RELATIONS, LinkAtom

from universe import Facts, element

A = element(1, K.FunctionalRequirement)
B = element(2, K.FunctionalRequirement)
C = element(3, K.FunctionalRequirement)
OO_A = element(11, K.OOFunctionalRequirement)
OO_B = element(12, K.OOFunctionalRequirement)
OO_C = element(13, K.OOComponent)
CS1 = element(4, K.Constraint)
CS2 = element(5, K.Constraint)
IMPL = element(21, K.ImplementationFeature)
T1 = element(31, K.TestCase)
T2 = element(32, K.TestCase)


def L(s, rel, t) -> LinkAtom:
    return LinkAtom(s, rel, t)


# rule id -> (asserted links, facts, expected derived set)
WITNESSES = {
    "R1": ([L(A, "repeats", B)], Facts(), {L(B, "repeats", A)}),
    "R2": ([L(A, "repeats", B), L(B, "refines", C)], Facts(),
           {L(B, "repeats", A), L(A, "refines", C)}),
    "R3": ([L(A, "repeats", B), L(A, "refines", C)], Facts(),
           {L(B, "repeats", A), L(B, "refines", C)}),
    "R4": ([L(A, "complements", B)], Facts(), {L(B, "complements", A)}),
    "R5": ([L(CS1, "constrains", A), L(CS2, "constrains", A)], Facts(),
           {L(CS1, "complements", CS2), L(CS2, "complements", CS1)}),
    "R6": ([L(OO_A, "refines", OO_B), L(OO_B, "refines", A)], Facts(), {L(OO_A, "refines", A)}),
    "R7": ([], Facts(inherits=[(OO_C, OO_A)]), {L(OO_C, "refines", OO_A)}),
    "R8": ([L(IMPL, "refines", A)], Facts(), {L(IMPL, "implements", A)}),
    # the transitive contains(A,C) also makes B and C siblings under A, so R10 fires too
    "R9": ([L(A, "contains", B), L(B, "contains", C)], Facts(),
           {L(A, "contains", C), L(B, "complements", C), L(C, "complements", B)}),
    "R10": ([L(B, "contains", A), L(B, "contains", C)], Facts(),
            {L(A, "complements", C), L(C, "complements", A)}),
    "R11": ([L(T1, "tests", OO_A), L(T2, "tests", OO_A)], Facts(),
            {L(T1, "complements", T2), L(T2, "complements", T1)}),
    "R12": ([L(T1, "tests", OO_A), L(OO_A, "refines", A)], Facts(), {L(T1, "validates", A)}),
    "R13": ([], Facts(is_a_client=[(OO_C, OO_A)]), {L(OO_C, "refers_to", OO_A)}),
    "R14": ([L(A, "refers_to", B), L(B, "refers_to", C)], Facts(), {L(A, "refers_to", C)}),
}

# the conclusion each witness exists for
CONCLUSION = {
    "R1": L(B, "repeats", A), "R2": L(A, "refines", C), "R3": L(B, "refines", C),
    "R4": L(B, "complements", A), "R5": L(CS1, "complements", CS2), "R6": L(OO_A, "refines", A),
    "R7": L(OO_C, "refines", OO_A), "R8": L(IMPL, "implements", A), "R9": L(A, "contains", C),
    "R10": L(A, "complements", C), "R11": L(T1, "complements", T2), "R12": L(T1, "validates", A),
    "R13": L(OO_C, "refers_to", OO_A), "R14": L(A, "refers_to", C),
}


def premises(rule_id: str) -> list:
    links, facts, _ = WITNESSES[rule_id]
    return [*links, *(("inherits", p) for p in facts.inherits), *(("is_a_client", p) for p in facts.is_a_client)]


def without(rule_id: str, drop) -> tuple[list[LinkAtom], Facts]:
    links, facts = [], Facts()
    for p in premises(rule_id):
        if p == drop:
            continue
        if isinstance(p, LinkAtom):
            links.append(p)
        else:
            getattr(facts, p[0]).append(p[1])
    return links, facts


def mirrors(links) -> set[LinkAtom]:
    return {a.mirrored() for a in links if RELATIONS[a.relation].symmetric}
