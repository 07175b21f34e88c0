"""Search for a UCS model on the carbonate table with numeric constants.

Run: python3 demos/evolve_ucs.py
Equivalent CLI run:
    gepucs evolve --train src/gepucs/data/table1.csv --config demos/ucs_run.cfg --out ucs_model.json
"""

# %%
from gepucs import metrics, split, table1
from gepucs.evolver import EvolutionConfig, TrainingSet, evolve
from gepucs.karva import chromosome_infix, evaluate_chromosome

train_ds, test_ds = split(table1(), 2 / 3, 0)
train = TrainingSet.from_dataset(train_ds)
print(len(train_ds), "train /", len(test_ds), "test")

# %%
config = EvolutionConfig(population_size=100, generations=300, head_length=8, num_genes=3,
                         rnc_enabled=True, rnc_range=(-10.0, 10.0), seed=1)
result = evolve(config, train)
print("best fitness", round(result.best_fitness, 3))
print(chromosome_infix(result.best, config.functions, train.terminals))

# %% Held-out scores.  The test side is only 13 rows so expect noise.
pred = evaluate_chromosome(result.best, test_ds.features(), config.functions, train.terminals)
print(metrics.MetricsReport.compute(test_ds.target(), pred).to_json())
