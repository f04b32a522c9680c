#!/usr/bin/env python3
"""Walk one scripted conversation through the whole pipeline.

Shows the gate-ordered routing trace for each turn: an explicit topic
request, entity recognition inside the movies dialogue, a fact lookup, a
switching intent, low-ASR-confidence handling and the profanity gate.
"""

import tempfile

from convograph.analysis import AsrHypothesis
from convograph.engine import Engine, EngineConfig

engine = Engine(EngineConfig(data_dir=tempfile.mkdtemp(), seed=7))
session_id = engine.create_session()
ctx = engine.restore_session(session_id)

script = [
    "let's chat about movies",
    "i really love frozen",
    "yes please",
    "tell me a joke",
    "no thanks",
]

for line in script:
    result = engine.process_turn(ctx, text=line)
    print(f"you> {line}")
    print(f"bot> {result.response}")
    print(f"     module={result.module} topic={result.topic} state={result.state}")
    print(f"     trace: {' | '.join(result.trace)}\n")

# a mumbled utterance: every hypothesis falls below the 0.7 confidence gate
mumble = AsrHypothesis(tokens=(("blur", 0.3), ("words", 0.4)), rank=0)
result = engine.process_turn(ctx, hypotheses=[mumble])
print("you> (mumbling, mean ASR confidence 0.35)")
print(f"bot> {result.response}")
print(f"     module={result.module} confident={result.confident}\n")

result = engine.process_turn(ctx, text="you stupid bot")
print("you> you stupid bot")
print(f"bot> {result.response}")
print(f"     module={result.module} profane={result.profane}")
