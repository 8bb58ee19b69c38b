"""Writes data/sample_testset.jsonl: 126 four-option questions built from templates."""

import json
import random
from pathlib import Path

FACTS = [
    # (discipline, subject, attribute, correct, distractors)
    ("chemistry", "paclitaxel", "terpenoid class", "diterpenoid", ["monoterpenoid", "sesquiterpenoid", "triterpenoid"]),
    ("chemistry", "artemisinin", "terpenoid class", "sesquiterpenoid", ["monoterpenoid", "diterpenoid", "tetraterpenoid"]),
    ("chemistry", "menthol", "terpenoid class", "monoterpenoid", ["sesquiterpenoid", "diterpenoid", "triterpenoid"]),
    ("chemistry", "limonene", "terpenoid class", "monoterpenoid", ["diterpenoid", "triterpenoid", "sesterterpenoid"]),
    ("chemistry", "squalene", "terpenoid class", "triterpenoid", ["monoterpenoid", "diterpenoid", "sesquiterpenoid"]),
    ("chemistry", "ginkgolide B", "terpenoid class", "diterpenoid", ["monoterpenoid", "sesquiterpenoid", "tetraterpenoid"]),
    ("chemistry", "artemisinin", "key pharmacophore", "endoperoxide bridge", ["epoxide ring", "lactam ring", "azide group"]),
    ("chemistry", "ginkgolide B", "unusual substituent", "tert-butyl group", ["nitro group", "bromine atom", "sulfonate"]),
    ("biosynthesis", "paclitaxel", "committed cyclase", "taxadiene synthase", ["amorphadiene synthase", "limonene synthase", "lanosterol synthase"]),
    ("biosynthesis", "artemisinin", "committed cyclase", "amorphadiene synthase", ["taxadiene synthase", "pinene synthase", "squalene synthase"]),
    ("biosynthesis", "sterols", "cyclase family", "oxidosqualene cyclase", ["prenyltransferase", "polyketide synthase", "NRPS"]),
    ("biosynthesis", "taxadiene", "precursor", "geranylgeranyl diphosphate", ["farnesyl diphosphate", "geranyl diphosphate", "squalene"]),
    ("biosynthesis", "amorphadiene", "precursor", "farnesyl diphosphate", ["geranylgeranyl diphosphate", "geranyl diphosphate", "lanosterol"]),
    ("biosynthesis", "limonene", "precursor", "geranyl diphosphate", ["farnesyl diphosphate", "squalene", "mevalonate"]),
    ("pharmacology", "paclitaxel", "molecular target", "microtubules", ["topoisomerase II", "DNA gyrase", "HMG-CoA reductase"]),
    ("pharmacology", "menthol", "receptor", "TRPM8", ["TRPV1", "GABA-A", "mu opioid receptor"]),
    ("pharmacology", "ginkgolide B", "receptor", "platelet activating factor receptor", ["TRPM8", "beta-2 adrenoceptor", "H1 receptor"]),
    ("pharmacology", "artemisinin", "indication", "malaria", ["tuberculosis", "influenza", "hypertension"]),
    ("pharmacology", "paclitaxel", "dose-limiting toxicity", "peripheral neuropathy", ["hepatotoxicity", "ototoxicity", "nephrotoxicity"]),
    ("pharmacology", "lanosterol synthase inhibitors", "effect", "lower cholesterol biosynthesis", ["raise blood glucose", "block sodium channels", "inhibit platelet aggregation"]),
    ("sources", "paclitaxel", "original natural source", "Taxus brevifolia", ["Artemisia annua", "Ginkgo biloba", "Mentha piperita"]),
    ("sources", "artemisinin", "natural source", "Artemisia annua", ["Taxus brevifolia", "Citrus sinensis", "Ginkgo biloba"]),
    ("sources", "ginkgolides", "natural source", "Ginkgo biloba", ["Taxus baccata", "Artemisia annua", "Pinus sylvestris"]),
    ("sources", "d-limonene", "common industrial source", "orange peel", ["yew bark", "ginkgo root", "sweet wormwood"]),
    ("biotechnology", "artemisinic acid", "industrial host", "Saccharomyces cerevisiae", ["Bacillus subtilis", "Aspergillus niger", "CHO cells"]),
    ("biotechnology", "paclitaxel supply", "semisynthetic starting material", "10-deacetylbaccatin III", ["artemisinic acid", "squalene", "geraniol"]),
]

TEMPLATES = [
    "What is the {attribute} of {subject}?",
    "Which option correctly gives the {attribute} of {subject}?",
    "For {subject}, which of the following is the {attribute}?",
    "Select the {attribute} associated with {subject}.",
    "In the terpenoid literature, the {attribute} of {subject} is:",
]


def main() -> None:
    rng = random.Random(20240126)
    rows = []
    n = 0
    for t in range(len(TEMPLATES)):
        for discipline, subject, attribute, correct, distractors in FACTS:
            if n == 126:
                break
            options = [correct] + list(distractors)
            rng.shuffle(options)
            n += 1
            rows.append({
                "qid": f"q{n:03d}",
                "stem": TEMPLATES[t].format(subject=subject, attribute=attribute),
                "options": options,
                "correct": options.index(correct),
                "discipline": discipline,
                "source_ref": None,
            })
    out = Path(__file__).resolve().parent.parent / "data" / "sample_testset.jsonl"
    with out.open("w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")
    print(f"wrote {len(rows)} questions to {out}")


if __name__ == "__main__":
    main()
