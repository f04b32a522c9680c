#!/usr/bin/env python3
"""Author a tiny topic dialogue in YAML, lint it, and step through it.

The same loader and stepper the engine uses, without the full pipeline:
handy when designing a new graph.
"""

import tempfile
from pathlib import Path

from convograph.analysis import Annotations, pos_tag, tokenize
from convograph.context import Context
from convograph.dialogue import DialogueStepper, lint_graph, load_graph

GRAPH = """
topic: teatime
keywords: [tea]
concepts: []
initial: offer
switch_intents: []
intent_examples: {}
states:
  - id: offer
    action: respond(offer_tea)
    transitions:
      - yes -> pour
      - no -> farewell
      - default -> offer
  - id: pour
    action: respond(pour_tea)
    transitions:
      - default -> farewell
  - id: farewell
    action: respond(farewell)
    transitions: []
templates:
  offer_tea:
    - ["Fancy a cup of tea?", "Tea break?"]
  pour_tea:
    - ["Here you go, one perfect cup."]
  farewell:
    - ["Until next teatime!"]
"""

path = Path(tempfile.mkdtemp()) / "teatime.yaml"
path.write_text(GRAPH, encoding="utf-8")

graph = load_graph(path)
print(f"loaded topic {graph.topic!r} with states {sorted(graph.states)}")
print("lint findings:", lint_graph(graph) or "none")


def annotate(text: str) -> Annotations:
    tokens = tokenize(text)
    return Annotations(tokens=tokens, truecased=tokens, pos_tags=pos_tag(tokens))


ctx = Context(session_id="demo")
stepper = DialogueStepper(graph, templates={})
for i, line in enumerate(["hello", "yes please", "thanks"]):
    outcome = stepper.step(ctx, annotate(line), seed=3 + i, fresh=(i == 0))
    print(f"you> {line}")
    print(f"bot> {' '.join(outcome.responses) or '(no transition)'}  [state={outcome.state}]")
