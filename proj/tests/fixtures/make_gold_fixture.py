#!/usr/bin/env python3
"""Writes the 20-target synthetic gold fixture (all text invented)."""
import json
import sys

IH = ["APB", "RDP", "EM", "RL", "RB", "SO", "MF"]
IA = ["DAL", "CDP", "CA", "AH", "DP", "UC"]

SUBS = ["askscience", "changemyview", "philosophy", "politics"]

# (title, submission, first comment, target comment, position, labels_a, labels_b)
ROWS = [
    ("Is nuclear power worth the risk?", "Trying to decide where I stand on this.", "",
     "I lean toward yes, but that is just my take and I could be missing something about waste storage.",
     "first", ["APB", "RL"], ["APB", "RL", "SO"]),
    ("Should homework be banned?", "Teachers keep assigning more.", "Homework teaches discipline.",
     "I see why you think so, and parents I know feel the same way, even though my experience was different.",
     "second", ["RDP"], ["RDP", "APB"]),
    ("Why do cats purr?", "Curious about the mechanism.", "",
     "According to a 2002 review in a veterinary journal, purring comes from laryngeal muscle twitching.",
     "first", ["EM", "SO"], ["EM"]),
    ("Remote work is overrated", "Offices build culture.", "Hard disagree, commuting wastes hours.",
     "Anyone who disagrees with this simply has not thought about it for more than five seconds.",
     "second", ["DAL", "CA"], ["DAL", "CA", "UC"]),
    ("Best way to learn a language?", "Apps or classes?", "",
     "Honestly I am not sure there is one best way; I only know what worked for me.",
     "first", ["RL", "APB"], ["RL", "APB"]),
    ("Is tipping culture broken?", "It keeps creeping up.", "Servers depend on tips.",
     "Fair point, you changed my mind a bit. I had not considered how wages are set.",
     "second", ["RB", "RDP"], ["RB", "RDP"]),
    ("Electric cars and the grid", "Can it keep up?", "",
     "Obviously the grid will collapse, everyone with a brain knows this and the engineers are idiots.",
     "first", ["CA", "AH"], ["CA", "AH", "DAL"]),
    ("Why is the sky blue?", "Simple question.", "",
     "Rayleigh scattering. Shorter wavelengths scatter more; see any intro optics text for the derivation.",
     "first", ["EM"], ["EM", "SO"]),
    ("Does free will exist?", "Long-time lurker, first post.", "Determinism settles it.",
     "That is one way to read it, and you may well be right, though compatibilists would push back here.",
     "second", ["RDP", "RL"], ["RDP", "RL", "MF"]),
    ("Minimum wage debate", "Raise it or not?", "",
     "People who want a higher minimum wage are lazy and just want handouts, period.",
     "first", ["DP", "UC"], ["DP", "UC", "CDP"]),
    ("Are video games art?", "Saw a debate about this.", "",
     "Of course they are, and anyone saying otherwise is stuck in the past. Not up for discussion.",
     "first", ["DAL", "CDP"], ["DAL", "CDP", "CA"]),
    ("Cooking with cast iron", "Worth the hassle?", "Only if you season it.",
     "Thanks, I appreciate the tip and I will try seasoning it properly before giving up.",
     "second", ["MF"], ["MF", "RB"]),
    ("Is the four day week viable?", "Some trials look positive.", "",
     "The trials I have read are small, so I would hold off on strong conclusions until more data comes in.",
     "first", ["SO", "RL"], ["SO", "RL"]),
    ("Space exploration funding", "Is it a waste?", "We have problems on Earth.",
     "You clearly do not understand economics at all. Read a book before posting nonsense.",
     "second", ["CA", "AH", "UC"], ["CA", "AH"]),
    ("Morning vs night workouts", "Which is better?", "",
     "Mornings work for me but I know plenty of people who do better at night, so it probably depends.",
     "first", ["APB", "RDP"], ["APB", "RDP"]),
    ("Public transit in small towns", "Does it ever pay off?", "",
     "Good question. I used to think no, but the examples in this thread made me reconsider.",
     "first", ["RB", "MF"], ["RB"]),
    ("Is math discovered or invented?", "Classic question.", "Invented, obviously.",
     "Nope, discovered. There is nothing to debate and the other side has no arguments worth hearing.",
     "second", ["CDP", "DAL"], ["CDP", "DAL"]),
    ("What is a good first camera?", "Budget around 500.", "",
     "Any recent mirrorless body will do; the lens matters more than the brand.",
     "first", [], []),
    ("Thoughts on the new bridge design?", "City council approved it.", "",
     "Looks fine to me. Construction starts next spring according to the council notes.",
     "first", [], ["EM"]),
    ("Should voting be mandatory?", "Several countries do it.", "It raises turnout.",
     "Mandatory voting is just what authoritarians want, and its supporters are sheep who cannot think.",
     "second", ["AH", "DP", "CA"], ["AH", "CA"]),
]


def coarse(labels):
    ih = sum(1 for l in labels if l in IH)
    ia = sum(1 for l in labels if l in IA)
    if ih > ia:
        return "IH"
    if ia > ih:
        return "IA"
    return "Neutral"


def main(path):
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for i, (title, sub_text, first, target, pos, a, b) in enumerate(ROWS, start=1):
            tid = "syn%02d#%s" % (i, "1" if pos == "first" else "2")
            tgt = {
                "target_id": tid,
                "subreddit": SUBS[i % len(SUBS)],
                "post_id": "syn%02d" % i,
                "target_position": pos,
                "title": title,
                "submission_text": sub_text,
                "target_text": target,
            }
            if pos == "second":
                tgt["first_comment"] = first
            rec = {
                "target": tgt,
                "labels_a": sorted(a),
                "labels_b": sorted(b),
                "coarse": coarse(set(a) | set(b)),
                "codebook_version": 1,
            }
            out.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "gold_20.jsonl")
