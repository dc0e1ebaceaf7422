"""Deterministic synthetic corpora bundled with the package.

Nothing here is real law. Article bodies are built so that every planted
key phrase occupies its own clause: the offline extractor's clause-aware
n-gram matching then recovers exactly the planted phrases, which keeps
graph construction fully predictable in tests.
"""

from __future__ import annotations

import json
import os
from typing import Sequence

import numpy as np

# Short legal-flavored phrases; none is a word-level substring of another.
PHRASE_BANK = [
    "accepting bribes",
    "abuse of power",
    "bribery",
    "embezzlement of public funds",
    "public and private property",
    "multiple thefts",
    "causing damage",
    "seriously disrupting public order",
    "lawfully performing duties",
    "committing fraud",
    "unlawful possession",
    "intentional injury",
    "traffic accident liability",
    "evading taxes",
    "falsifying records",
    "organized smuggling",
    "illegal fundraising",
    "breach of fiduciary duty",
    "money laundering",
    "forging official documents",
    "obstructing justice",
    "endangering public safety",
    "illegal business operations",
    "trading on inside information",
    "manipulating securities markets",
    "infringing trade secrets",
    "counterfeiting registered trademarks",
    "illegal mining",
    "environmental pollution",
    "illegal logging",
    "poaching protected wildlife",
    "food safety violations",
    "producing substandard medicine",
    "medical malpractice",
    "illegal medical practice",
    "spreading false information",
    "inciting violence",
    "gathering to disturb order",
    "interfering with elections",
    "leaking state secrets",
    "dereliction of duty",
    "favoritism in enforcement",
    "bending the law",
    "extorting confessions",
    "unlawful detention",
    "illegal search",
    "violating privacy of correspondence",
    "defamation",
    "insulting others publicly",
    "kidnapping for ransom",
    "human trafficking",
    "forced labor",
    "child endangerment",
    "bigamy",
    "family abandonment",
    "drug trafficking",
    "drug possession",
    "sheltering drug users",
    "organizing gambling",
    "operating casinos",
    "loan sharking",
    "contract fraud",
    "credit card fraud",
    "insurance fraud",
    "fundraising fraud",
    "tax invoice fraud",
    "smuggling ordinary goods",
    "smuggling cultural relics",
    "smuggling precious metals",
    "arms trafficking",
    "explosives possession",
    "illegal firearm manufacture",
    "hijacking transport vehicles",
    "sabotaging power facilities",
    "sabotaging transport infrastructure",
    "arson",
    "flood hazard creation",
    "reckless endangerment",
    "major work safety accidents",
    "concealing accident facts",
    "refusing rescue obligations",
    "harboring criminals",
    "concealing criminal proceeds",
    "witness intimidation",
    "perjury",
    "fabricating evidence",
    "escaping custody",
    "organizing jailbreak",
    "mass disturbance of workplaces",
    "blocking public roads",
    "seizing state property",
    "misappropriating relief funds",
    "withholding disaster donations",
    "privately dividing state assets",
    "illegal land occupation",
    "destroying cultivated land",
    "illegal building demolition",
    "violent eviction",
    "rigging public tenders",
    "collusive bidding",
    "bribing business partners",
    "serious irresponsibility at work",
    "issuing false certificates",
    "illegal land transfer approval",
    "neglecting supervision duties",
    "disclosing investigation details",
    "retaliating against whistleblowers",
    "suppressing accusations",
    "misusing regulatory authority",
    "illegally granting loans",
    "accepting kickbacks",
    "dividing confiscated property",
    "impersonating state functionaries",
    "buying counterfeit currency",
    "holding counterfeit currency",
    "altering financial instruments",
    "illegal fund transfers",
    "breaching entrusted asset duties",
    "disturbing financial order",
    "releasing toxic substances",
]

# Fixed boilerplate: present in every article, so its n-grams are filtered
# out of the offline extractor's lexicon by the document-frequency ceiling.
_OPENER = "The following conduct is punishable"
_CLOSER = (
    "Violators shall be sentenced to fixed-term imprisonment and fined "
    "according to law."
)

_SURNAMES = [
    "Li", "Wang", "Zhang", "Liu", "Chen", "Yang", "Zhao", "Huang", "Zhou", "Wu",
    "Xu", "Sun", "Hu", "Zhu", "Gao", "Lin", "He", "Guo", "Ma", "Luo",
]

_REASON_TEMPLATES = [
    "crime involving {p}",
    "prosecution for {p}",
    "charges of {p}",
]


def generate_statutes(count: int = 452, seed: int = 20210301) -> list[dict]:
    """Synthetic statute records with planted key phrases, 3-6 per article.

    The bank subset scales with corpus size, and every used phrase appears
    in at least two articles, so the offline extractor's document-frequency
    floor keeps all planted phrases in the lexicon. No article carries
    more than eight phrases, the extractor's per-article budget.
    """
    rng = np.random.default_rng(seed)
    bank = PHRASE_BANK[: min(len(PHRASE_BANK), max(8, count * 2))]
    assignments: list[list[str]] = []
    for _ in range(count):
        n_phrases = int(rng.integers(3, 7))
        picks = rng.choice(len(bank), size=min(n_phrases, len(bank)), replace=False)
        assignments.append([bank[i] for i in sorted(picks)])
    # patch any phrase used exactly once into a second article
    usage: dict[str, int] = {p: 0 for p in bank}
    for phrases in assignments:
        for p in phrases:
            usage[p] += 1
    for phrase, used in usage.items():
        while 0 < used < 2:
            room = [
                i for i in range(count)
                if phrase not in assignments[i] and len(assignments[i]) < 8
            ]
            target = int(room[rng.integers(len(room))])
            assignments[target].append(phrase)
            used += 1
    records = []
    for i, phrases in enumerate(assignments, start=1):
        body = f"Article {i}. {_OPENER}: " + "; ".join(phrases) + f". {_CLOSER}"
        records.append({"article_number": str(i), "body": body})
    return records


def planted_phrases(body: str) -> list[str]:
    """Recover the phrase list planted by :func:`generate_statutes`."""
    middle = body.split(": ", 1)[1].rsplit(". ", 1)[0]
    return middle.split("; ")


def generate_judgments(
    statutes: Sequence[dict], count: int = 60, seed: int = 20210601
) -> list[dict]:
    """Synthetic judgments citing 1-3 articles, facts echoing their phrases."""
    rng = np.random.default_rng(seed)
    records = []
    base = np.datetime64("2021-03-01")
    for i in range(count):
        n_cited = int(rng.integers(1, 4))
        picks = rng.choice(len(statutes), size=n_cited, replace=False)
        cited = [statutes[int(j)]["article_number"] for j in picks]
        primary = statutes[int(picks[0])]
        phrases = planted_phrases(primary["body"])
        n_mention = min(len(phrases), int(rng.integers(2, 5)))
        mention_idx = rng.choice(len(phrases), size=n_mention, replace=False)
        mentioned = [phrases[int(j)] for j in sorted(mention_idx)]
        surname = _SURNAMES[int(rng.integers(len(_SURNAMES)))]
        day = base + int(rng.integers(0, 900))
        amount = int(rng.integers(5, 500)) * 1000
        facts = (
            f"The defendant {surname} was investigated after reports of "
            f"{mentioned[0]}. The evidence established conduct involving "
            + ", ".join(mentioned)
            + f", with illicit proceeds of {amount} yuan. The defendant "
            "confessed during trial and returned part of the proceeds."
        )
        reason_template = _REASON_TEMPLATES[int(rng.integers(len(_REASON_TEMPLATES)))]
        records.append(
            {
                "case_name": f"People v. {surname} ({2021 + i % 3}) No. {100 + i}",
                "session_date": str(day),
                "prosecution_reason": reason_template.format(p=mentioned[0]),
                "facts": facts,
                "cited_articles": cited,
            }
        )
    return records


# --------------------------------------------------------------------------
# Synthetic graph for link-prediction tests
# --------------------------------------------------------------------------

def planted_two_block_graph(num_nodes: int = 60, seed: int = 7):
    """Two complete bipartite blocks over shuffled node labels.

    Relation 0 connects ten group-A senders to fifteen group-B receivers;
    relation 1 connects fifteen group-B senders back to ten group-A
    receivers (150 edges each, 300 total). Because the blocks are
    complete, every corrupted triple falls outside a block and is
    separable from the positives by group membership alone, so link
    prediction on held-out edges is learnable from structure rather than
    memorization.
    """
    import numpy as np

    from .embed.rgcn import TripleGraph

    rng = np.random.default_rng(seed)
    perm = rng.permutation(num_nodes)
    quarter = num_nodes // 6  # 10 for the default size
    a_send = perm[0:quarter]
    a_recv = perm[quarter : 2 * quarter]
    b_recv = perm[3 * quarter : 3 * quarter + (num_nodes // 4)]
    b_send = perm[3 * quarter + (num_nodes // 4) :]
    rows = []
    for s in a_send:
        for o in b_recv:
            rows.append((int(s), 0, int(o)))
    for s in b_send[: num_nodes // 4]:
        for o in a_recv:
            rows.append((int(s), 1, int(o)))
    return TripleGraph(num_nodes, 2, np.array(rows, dtype=np.int64).reshape(-1, 3))


# --------------------------------------------------------------------------
# Bribery case replay fixture
# --------------------------------------------------------------------------

ZHANGYUE_CASE_TEXT = (
    "While serving as the cultural administrator and grid worker of Yongfeng "
    "Village, Zhang Yue tampered with resident registration records to obtain "
    "improper benefits and took 72,500 yuan in bribes. The conduct involved "
    "accepting bribes, abuse of power, and bribery committed while holding "
    "public office. After the matter came to light, Zhang Yue voluntarily "
    "admitted the facts and returned the money."
)

ZHANGYUE_SCRIPT = [
    "accepting bribes; abuse of power; bribery",
    "Article 385",
]

_ZY_ARTICLES = [
    ("382", ["embezzlement of public funds", "abuse of power", "seizing state property"]),
    ("383", ["embezzlement of public funds", "misappropriating relief funds"]),
    ("385", ["accepting bribes", "bribery", "abuse of power", "accepting kickbacks"]),
    ("386", ["accepting bribes", "accepting kickbacks"]),
    ("389", ["bribery", "bribing business partners"]),
    ("390", ["bribing business partners", "illegally granting loans"]),
    ("397", ["abuse of power", "dereliction of duty", "neglecting supervision duties"]),
    ("398", ["leaking state secrets", "dereliction of duty"]),
    ("399", ["bending the law", "favoritism in enforcement"]),
    ("402", ["favoritism in enforcement", "misusing regulatory authority"]),
    ("408", ["environmental pollution", "neglecting supervision duties", "illegal land occupation"]),
    ("410", ["illegal land transfer approval", "illegal land occupation"]),
]

_ZY_JUDGMENTS = [
    {
        "case_name": "People v. Qian (2021) No. 204",
        "session_date": "2021-09-14",
        "prosecution_reason": "charges of accepting bribes",
        "facts": (
            "A township official named Qian used his position to demand payments "
            "from contractors, a course of accepting bribes that continued for two "
            "years; the bribery totaled 310,000 yuan and involved abuse of power "
            "in approving permits."
        ),
        "cited_articles": ["385"],
    },
    {
        "case_name": "People v. Sun (2022) No. 87",
        "session_date": "2022-03-02",
        "prosecution_reason": "charges of accepting bribes",
        "facts": (
            "Sun, while administering village collective funds, engaged in "
            "accepting bribes from suppliers and in bribery arrangements with a "
            "purchasing agent, taking 56,000 yuan in total."
        ),
        "cited_articles": ["385", "386"],
    },
    {
        "case_name": "People v. Zhou (2021) No. 351",
        "session_date": "2021-11-29",
        "prosecution_reason": "prosecution for abuse of power",
        "facts": (
            "Zhou, a regulatory inspector, practiced abuse of power and "
            "dereliction of duty by waving through unsafe facilities, causing "
            "damage to public infrastructure."
        ),
        "cited_articles": ["397"],
    },
    {
        "case_name": "People v. Wu (2022) No. 12",
        "session_date": "2022-01-17",
        "prosecution_reason": "charges of bribery",
        "facts": (
            "Wu offered repeated payments to a procurement officer, conduct "
            "amounting to bribery and commercial bribery around municipal "
            "tenders worth 2.4 million yuan."
        ),
        "cited_articles": ["389"],
    },
    {
        "case_name": "People v. Zheng (2021) No. 440",
        "session_date": "2021-12-20",
        "prosecution_reason": "prosecution for embezzlement of public funds",
        "facts": (
            "Zheng diverted village accounts for personal investment, an "
            "embezzlement of public funds matched with seizing state property "
            "valued at 180,000 yuan."
        ),
        "cited_articles": ["382", "383"],
    },
    {
        "case_name": "People v. Feng (2022) No. 58",
        "session_date": "2022-02-08",
        "prosecution_reason": "prosecution for favoritism in enforcement",
        "facts": (
            "Feng, a court clerk, engaged in bending the law and favoritism in "
            "enforcement by altering enforcement orders for a relative."
        ),
        "cited_articles": ["399", "402"],
    },
]


def zhangyue_statutes() -> list[dict]:
    records = []
    for number, phrases in _ZY_ARTICLES:
        body = f"Article {number}. {_OPENER}: " + "; ".join(phrases) + f". {_CLOSER}"
        records.append({"article_number": number, "body": body})
    return records


def zhangyue_judgments() -> list[dict]:
    return [dict(j) for j in _ZY_JUDGMENTS]


# --------------------------------------------------------------------------
# File emission
# --------------------------------------------------------------------------

def write_jsonl(path: str, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def write_all(out_dir: str) -> dict[str, str]:
    """Emit every bundled fixture into ``out_dir``; returns name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    zy_dir = os.path.join(out_dir, "zhangyue")
    eval_dir = os.path.join(out_dir, "eval")
    os.makedirs(zy_dir, exist_ok=True)
    os.makedirs(eval_dir, exist_ok=True)

    paths = {}

    statutes = generate_statutes()
    paths["statutes_452"] = os.path.join(out_dir, "statutes_452.jsonl")
    write_jsonl(paths["statutes_452"], statutes)

    eval_statutes = generate_statutes(count=40, seed=7)
    paths["eval_statutes"] = os.path.join(eval_dir, "statutes.jsonl")
    write_jsonl(paths["eval_statutes"], eval_statutes)
    eval_judgments = generate_judgments(eval_statutes, count=60, seed=11)
    paths["eval_judgments"] = os.path.join(eval_dir, "judgments.jsonl")
    write_jsonl(paths["eval_judgments"], eval_judgments)

    paths["zhangyue_statutes"] = os.path.join(zy_dir, "statutes.jsonl")
    write_jsonl(paths["zhangyue_statutes"], zhangyue_statutes())
    paths["zhangyue_judgments"] = os.path.join(zy_dir, "judgments.jsonl")
    write_jsonl(paths["zhangyue_judgments"], zhangyue_judgments())
    paths["zhangyue_case"] = os.path.join(zy_dir, "case.txt")
    with open(paths["zhangyue_case"], "w", encoding="utf-8") as fh:
        fh.write(ZHANGYUE_CASE_TEXT + "\n")
    paths["zhangyue_script"] = os.path.join(zy_dir, "script.json")
    with open(paths["zhangyue_script"], "w", encoding="utf-8") as fh:
        json.dump({"responses": ZHANGYUE_SCRIPT}, fh, indent=1)
        fh.write("\n")
    return paths
