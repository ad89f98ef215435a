"""Deterministic synthetic corpus for tests, demos, and service fixtures.

Sentences carry category-distinctive vocabulary so taggers, rankers, and
generic banks behave meaningfully; ratings correlate with decisions; a few
submissions fall outside the word-count filter on purpose.
"""

from __future__ import annotations

import random

from .corpus import Corpus, Decision, MetaReview, LabeledSentence, Review, Submission
from .labels import CategoryLabel

_TOPICS = (
    "the proposed method", "the new benchmark", "the transfer setting",
    "the ablation study", "the theoretical analysis", "the attention module",
    "the training objective", "the evaluation protocol", "the graph encoder",
    "the data augmentation scheme",
)
_AREAS = (
    "image classification", "machine translation", "question answering",
    "speech recognition", "program synthesis", "graph learning",
    "dialogue modeling", "text summarization",
)
_ASPECTS = (
    "the clear writing", "the strong empirical gains", "the novel formulation",
    "the thorough ablations", "the careful analysis", "the elegant proof",
    "the reproducible setup", "the honest error analysis",
)
_WEAK_ASPECTS = (
    "evaluation", "novelty", "comparison to baselines", "experimental scope",
    "clarity of presentation", "theoretical grounding", "related work coverage",
)
_FLAWS = ("limited", "unclear", "insufficient", "weak", "incomplete")
_ACTIONS = (
    "add stronger baselines", "clarify the notation",
    "report variance across seeds", "discuss limitations",
    "include runtime comparisons", "release the code",
)
_REVISIONS = (
    "new baselines", "an ablation table", "clarifying proofs", "error bars",
    "a larger study",
)


def _abstract(rng: random.Random) -> str:
    verb = rng.choice(("studies", "presents", "proposes", "introduces", "revisits"))
    return f"This paper {verb} {rng.choice(_TOPICS)} for {rng.choice(_AREAS)}."


def _strength(rng: random.Random) -> str:
    return rng.choice((
        f"The reviewers praise {rng.choice(_ASPECTS)} and find the results convincing.",
        f"A clear strength is {rng.choice(_ASPECTS)} noted by all reviewers.",
        f"All reviewers agree that {rng.choice(_ASPECTS)} is solid and well executed.",
    ))


def _weakness(rng: random.Random) -> str:
    return rng.choice((
        f"However the {rng.choice(_WEAK_ASPECTS)} remains {rng.choice(_FLAWS)}.",
        f"The main concern is the {rng.choice(_WEAK_ASPECTS)} which looks {rng.choice(_FLAWS)}.",
        f"Reviewers worry that the {rng.choice(_WEAK_ASPECTS)} is {rng.choice(_FLAWS)}.",
    ))


def _rating_summary(rng: random.Random) -> str:
    a, b, c = rng.randint(1, 9), rng.randint(1, 9), rng.randint(1, 9)
    return rng.choice((
        f"The reviewers give scores of {a}, {b} and {c}.",
        f"Final ratings are {a} and {b} with confidence {c}.",
        f"This submission received ratings of {a}, {b} and {c} after rebuttal.",
    ))


def _ac_disagreement(rng: random.Random) -> str:
    who = rng.choice(("one", "two", "three"))
    return rng.choice((
        f"I disagree with reviewer {who} about {rng.choice(_ASPECTS)}.",
        f"Contrary to reviewer {who} I believe the {rng.choice(_WEAK_ASPECTS)} is adequate.",
    ))


def _rebuttal(rng: random.Random) -> str:
    return rng.choice((
        "The authors responded to all questions during the rebuttal.",
        f"The revision added {rng.choice(_REVISIONS)} after the discussion period.",
        "Author responses resolved most concerns raised in the discussion.",
    ))


def _suggestion(rng: random.Random) -> str:
    return rng.choice((
        f"The authors should {rng.choice(_ACTIONS)} in the final version.",
        f"I encourage the authors to {rng.choice(_ACTIONS)}.",
    ))


def _decision(rng: random.Random, decision: Decision) -> str:
    if decision == Decision.ACCEPT:
        return rng.choice((
            "I recommend acceptance of this paper.",
            "Therefore the committee decided to accept this submission.",
            "I am happy to accept this paper.",
        ))
    return rng.choice((
        "I recommend rejection at this time.",
        "Therefore I have to reject this submission.",
        "Unfortunately this paper cannot be accepted in its current form.",
    ))


def _misc(rng: random.Random) -> str:
    return rng.choice((
        "Thanks to the reviewers for the detailed discussion.",
        "Note that one review arrived after the deadline.",
        "The scores were entered late due to a system issue.",
    ))


_BUILDERS = {
    CategoryLabel.ABSTRACT: _abstract,
    CategoryLabel.STRENGTH: _strength,
    CategoryLabel.WEAKNESS: _weakness,
    CategoryLabel.RATING_SUMMARY: _rating_summary,
    CategoryLabel.AC_DISAGREEMENT: _ac_disagreement,
    CategoryLabel.REBUTTAL_PROCESS: _rebuttal,
    CategoryLabel.SUGGESTION: _suggestion,
    CategoryLabel.MISC: _misc,
}


def _meta_labels(rng: random.Random, decision: Decision, long: bool) -> list[CategoryLabel]:
    labels = [CategoryLabel.ABSTRACT]
    if rng.random() < 0.3:
        labels.append(CategoryLabel.ABSTRACT)
    accept = decision == Decision.ACCEPT
    middle: list[CategoryLabel] = []
    middle += [CategoryLabel.STRENGTH] * rng.randint(1 if accept else 0, 3 if accept else 1)
    middle += [CategoryLabel.WEAKNESS] * rng.randint(0 if accept else 1, 2 if accept else 4)
    if rng.random() < 0.5:
        middle.append(CategoryLabel.RATING_SUMMARY)
    if rng.random() < 0.35:
        middle.append(CategoryLabel.REBUTTAL_PROCESS)
    if rng.random() < 0.3:
        middle.append(CategoryLabel.SUGGESTION)
    if rng.random() < 0.12:
        middle.append(CategoryLabel.AC_DISAGREEMENT)
    if rng.random() < 0.08:
        middle.append(CategoryLabel.MISC)
    rng.shuffle(middle)
    if long:
        middle = middle * 9 + [CategoryLabel.WEAKNESS] * 10
    labels += middle
    labels.append(CategoryLabel.DECISION)
    return labels


def _meta_review(rng: random.Random, decision: Decision, short: bool, long: bool) -> MetaReview:
    if short:
        labels = [CategoryLabel.ABSTRACT, CategoryLabel.DECISION]
    else:
        labels = _meta_labels(rng, decision, long)
    sentences = []
    for label in labels:
        if label == CategoryLabel.DECISION:
            text = _decision(rng, decision)
        else:
            text = _BUILDERS[label](rng)
        sentences.append(LabeledSentence(text=text, label=label))
    return MetaReview(sentences=tuple(sentences), decision=decision)


def _review_text(rng: random.Random, rating: int) -> str:
    paragraphs = []
    for _ in range(rng.randint(2, 4)):
        sents = [f"The paper proposes {rng.choice(_TOPICS)} for {rng.choice(_AREAS)}."]
        if rating >= 6:
            sents.append(f"I like {rng.choice(_ASPECTS)} very much.")
            if rng.random() < 0.5:
                sents.append(_strength(rng))
        else:
            sents.append(_weakness(rng))
            if rng.random() < 0.5:
                sents.append(f"My main concern is the {rng.choice(_WEAK_ASPECTS)}.")
        if rng.random() < 0.4:
            sents.append(_suggestion(rng))
        if rng.random() < 0.3:
            sents.append(f"I rate this paper {rating}.")
        paragraphs.append(" ".join(sents))
    return "\n\n".join(paragraphs)


def synthetic_corpus(n_submissions: int = 160, seed: int = 7) -> Corpus:
    """Build a reproducible labeled corpus; same arguments, same corpus."""
    rng = random.Random(seed)
    submissions = []
    for i in range(n_submissions):
        high = i % 19 == 3  # avg rating >= 7 pocket for the high-score filter
        low = i % 19 == 11  # avg rating <= 3 pocket for the low-score filter
        short = i % 53 == 41  # below the 20-word floor
        long = i % 53 == 25  # above the 400-word ceiling
        if high:
            decision = Decision.ACCEPT
        elif low:
            decision = Decision.REJECT
        else:
            decision = Decision.ACCEPT if rng.random() < 0.4 else Decision.REJECT
        n_reviews = rng.randint(2, 4)
        reviews = []
        for r in range(n_reviews):
            if high:
                rating = rng.randint(7, 9)
            elif low:
                rating = rng.randint(1, 3)
            elif decision == Decision.ACCEPT:
                rating = rng.randint(5, 9)
            else:
                rating = rng.randint(2, 6)
            reviews.append(Review(
                reviewer_id=f"R{r + 1}",
                text=_review_text(rng, rating),
                rating=rating,
                confidence=rng.randint(2, 5) if rng.random() < 0.8 else None,
            ))
        submissions.append(Submission(
            id=f"synth-{i:04d}",
            year=rng.randint(2018, 2021),
            reviews=tuple(reviews),
            meta_review=_meta_review(rng, decision, short, long),
        ))
    return Corpus(submissions=tuple(submissions), provenance=f"synthetic(seed={seed})")
