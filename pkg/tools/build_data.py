"""Regenerate the bundled golden benchmark and the replay fixture store.

    python3 tools/build_data.py

Gold pairs below are written out by hand; fixtures are the deterministic
engine's answers to every request the golden benchmark produces, phrased as
model replies so the replay engine can serve them.
"""
from __future__ import annotations

import json
from pathlib import Path

from idiomizer.engines import DeterministicEngine, FixtureStore, LLMEngine, reply_text
from idiomizer.evaluation import BenchmarkEntry, CodePair, produced_pairs

DATA = Path(__file__).resolve().parent.parent / "src" / "idiomizer" / "data"

GOLDEN = [
    ("list-comprehension",
     "new_cols = []\nfor col in old_cols:\n    new_cols.append(col + postfix)\n",
     "new_cols = []\nfor col in old_cols:\n    new_cols.append(col + postfix)",
     "new_cols = [col + postfix for col in old_cols]"),
    ("set-comprehension",
     "new_cols = set()\nfor col in old_cols:\n    new_cols.add(col + postfix)\n",
     "new_cols = set()\nfor col in old_cols:\n    new_cols.add(col + postfix)",
     "new_cols = {col + postfix for col in old_cols}"),
    ("dict-comprehension",
     "new_cols = {}\nfor col in old_cols:\n    new_cols[col] = col + postfix\n",
     "new_cols = {}\nfor col in old_cols:\n    new_cols[col] = col + postfix",
     "new_cols = {col: col + postfix for col in old_cols}"),
    ("chain-comparison",
     "if a > b and a < 1:\n    pass\n",
     "a > b and a < 1",
     "b < a < 1"),
    ("truth-test",
     "if embedding_dim % 2 == 0:\n    pass\n",
     "embedding_dim % 2 == 0",
     "not embedding_dim % 2"),
    ("loop-else",
     "while attempt < 3:\n    ...\n    if body is not None:\n        break\nif body is None:\n    ...\n",
     "while attempt < 3:\n    ...\n    if body is not None:\n        break\nif body is None:\n    ...",
     "while attempt < 3:\n    ...\n    if body is not None:\n        break\nelse:\n    ..."),
    ("assign-multi-targets",
     "self._ad = device\nself._sl4a_client = None\n",
     "self._ad = device\nself._sl4a_client = None",
     "self._ad, self._sl4a_client = device, None"),
    ("for-multi-targets",
     "for sample in family.samples:\n    if sample[0] > 2:\n        ...\n",
     "for sample in family.samples:\n    if sample[0] > 2:\n        ...",
     "for e0, *e in family.samples:\n    if e0 > 2:\n        ..."),
    ("star-in-func-call",
     "nn.Linear(gate_channels[i], gate_channels[i+1])\n",
     "gate_channels[i], gate_channels[i+1]",
     "*gate_channels[i:i + 2]"),
    ("with",
     "bamfiles = [x.strip() for x in open(bamfile)]\n",
     "bamfiles = [x.strip() for x in open(bamfile)]",
     "with open(bamfile) as f:\n    bamfiles = [x.strip() for x in f]"),
    ("enumerate",
     "for i in range(len(text)):\n    w = text[i]\n    if w in token2id:\n        R[i] = token2id[w]\n",
     "for i in range(len(text)):\n    w = text[i]\n    if w in token2id:\n        R[i] = token2id[w]",
     "for (i, w) in enumerate(text):\n    if w in token2id:\n        R[i] = token2id[w]"),
    ("chain-assign-same-value",
     "global_draw_name = None\n_test_name = None\n",
     "global_draw_name = None\n_test_name = None",
     "global_draw_name = _test_name =None"),
    ("fstring",
     "log.info('sample_num_list is %s' % repr(self.sample_num_list))\n",
     "'sample_num_list is %s' % repr(self.sample_num_list)",
     "f'sample_num_list is {repr(self.sample_num_list)}'"),
    ("set-comprehension",
     "def collect(x, y, df):\n    z2 = set()\n    for z in y:\n        if z is x:\n            continue\n"
     "        if z not in df:\n            continue\n        z2.add(z)\n    return z2\n",
     "z2 = set()\nfor z in y:\n    if z is x:\n        continue\n    if z not in df:\n        continue\n    z2.add(z)",
     "z2 = {z for z in y if z is not x and z in df}"),
    ("chain-comparison",
     "def inside(y_int, h_i, w_i):\n    if 0< y_int <h_i and w_i < 0:\n        return True\n    return False\n",
     "0< y_int <h_i and w_i < 0",
     "w_i < 0 < y_int < h_i"),
    ("chain-comparison",
     "if args and args.save_steps > 0 and global_step % args.save_steps == 0:\n    save(args)\n",
     "args.save_steps > 0 and global_step % args.save_steps == 0",
     "args.save_steps > 0 == global_step % args.save_steps"),
    ("star-in-func-call",
     "out = f(feat.shape[-2], feat.shape[-1])\n",
     "feat.shape[-2], feat.shape[-1]",
     "*feat.shape[-2:]"),
]


class Recorder:
    """Answers with the deterministic engine and keeps each exchange as a fixture."""

    name = "recorder"

    def __init__(self, store: FixtureStore) -> None:
        self.store = store
        self.inner = DeterministicEngine()
        self.requests = LLMEngine(store)

    def run(self, idiom, abstract_code, ctx):
        outcome = self.inner.run(idiom, abstract_code, ctx)
        self.store.add(self.requests.request(idiom, abstract_code), reply_text(outcome))
        return outcome


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    entries = [
        BenchmarkEntry(source, __import__("idiomizer").IdiomKind.parse(idiom), (CodePair(before, after),))
        for idiom, source, before, after in GOLDEN
    ]
    golden = DATA / "golden.jsonl"
    golden.write_text("".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in entries), encoding="utf-8")
    fixtures = DATA / "fixtures.jsonl"
    fixtures.unlink(missing_ok=True)
    recorder = Recorder(FixtureStore(fixtures))
    for i, entry in enumerate(entries):
        produced_pairs(entry, recorder, i)
    print(f"{len(entries)} golden entries, {len(recorder.store)} fixtures")


if __name__ == "__main__":
    main()
