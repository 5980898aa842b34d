"""TCP reassembly IDS/IPS engine with keyed-cipher connection-table hashing."""

from .detection import Action, MatchResult, Signature, SignatureSet, Stage, load_signatures, match_buffer
from .engine import Decision, Engine, EngineConfig, EventKind, Mode, Verdict
from .hashing import FourTuple, HashConfig, Strategy, crypto_key, encode96, reverse, sum_mod_key
from .packet import PacketRecord, RawFrame, TcpFlags, build_frame, decode
from .reassembly import MAX_SEGMENT, MAX_STORED, MSS, WINDOW, PacketQueue, StoredPacket
from .table import ConnectionTable, FlowEntry, TableStats

__version__ = "0.1.0"

__all__ = [
    "Action", "ConnectionTable", "Decision", "Engine", "EngineConfig", "EventKind",
    "FlowEntry", "FourTuple", "HashConfig", "MAX_SEGMENT", "MAX_STORED", "MSS",
    "MatchResult", "Mode", "PacketQueue", "PacketRecord", "RawFrame", "Signature",
    "SignatureSet", "Stage", "Strategy", "StoredPacket", "TableStats", "TcpFlags",
    "Verdict", "WINDOW", "build_frame", "crypto_key", "decode", "encode96",
    "load_signatures", "match_buffer", "reverse", "sum_mod_key",
]
