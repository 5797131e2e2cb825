"""Walkthrough: TF-IDF routing and token-budget tool selection.

Tool descriptions are embedded as sparse term vectors; an intent is scored
against every tool by cosine similarity, then the budget-optimal subset is
picked by an exact knapsack so the planner only ever sees a small,
relevant toolset.
"""

from intentgate import router
from intentgate.config import fixture_path
from intentgate.registry import load_registry_file

registry = load_registry_file(fixture_path("tools.json"))
index = router.build_index(registry)
print(f"indexed {index.corpus_size} tools, vocabulary of {len(index.vocabulary)} terms")
print(f"total token cost of all schemas: {sum(index.token_costs.values())}\n")

intent = "revoke access permissions document"
vector = router.embed(index, intent)
sims = router.similarities(index, vector)
print(f"intent: {intent!r}")
for name, sim in sorted(sims.items(), key=lambda kv: -kv[1])[:5]:
    print(f"  {sim:.4f}  {name}  (cost {index.token_costs[name]})")

for budget in (512, 150, 0):
    chosen = router.select_tools(index, vector, budget)
    used = sum(index.token_costs[n] for n in chosen)
    print(f"\nbudget {budget:>3}: {len(chosen)} tools, {used} tokens used -> {chosen}")

print("\ncognitive cache at threshold 0.97:")
cache = router.CognitiveCache()
cache.insert(vector, "cached pipeline result", created_at=0.0)
hit = cache.lookup(router.embed(index, intent), 0.97)
print("  identical intent:", "HIT" if hit else "miss")
paraphrase = router.embed(index, "revoke the permission entries on this document")
print("  loose paraphrase:", "HIT" if cache.lookup(paraphrase, 0.97) else "miss")
