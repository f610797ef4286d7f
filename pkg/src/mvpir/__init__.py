"""Private information retrieval from matching vector families."""

from .errors import (CapacityError, ConfigError, FamilyFormatError, IntegrityError,
                     MVPIRError, ParameterError, ProtocolError)
from .family import MVFamily, grolmusz_S, load_family, save_family, search_family, validate_family
from .ring import RingElem, RingPoly
from .matrix import RingMatrix, adjugate, determinant
from .encoder import AnswerBundle, EncodedDatabase, encode
from .schemes import SchemeConfig, make_config, query_gen, reconstruct, server_answer
from .net import CostReport, retrieve

__all__ = [
    "AnswerBundle", "CapacityError", "ConfigError", "CostReport", "EncodedDatabase",
    "FamilyFormatError", "IntegrityError", "MVFamily", "MVPIRError", "ParameterError",
    "ProtocolError", "RingElem", "RingMatrix", "RingPoly", "SchemeConfig", "adjugate",
    "determinant", "encode", "grolmusz_S", "load_family", "make_config", "query_gen",
    "reconstruct", "retrieve", "save_family", "search_family", "server_answer",
    "validate_family",
]
