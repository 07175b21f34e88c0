"""Recover x*y + x from 50 noiseless samples.

Run: python3 demos/evolve_synthetic.py
"""

# %%
import numpy as np

from gepucs.evolver import EvolutionConfig, TrainingSet, evolve
from gepucs.karva import chromosome_infix

rng = np.random.default_rng(4)
x, y = rng.uniform(1, 10, 50), rng.uniform(1, 10, 50)
train = TrainingSet({"x": x, "y": y}, x * y + x)

# %% Small population, two genes linked by addition.
config = EvolutionConfig(population_size=50, head_length=6, num_genes=2,
                         generations=200, seed=0, target_fitness=999.999)


def report(gen, best):
    if gen % 10 == 0:
        print(f"gen {gen:3d}  best fitness {best:9.4f}")


result = evolve(config, train, callback=report)
print(f"stopped after {result.generations_run} generations at {result.best_fitness:.4f}")
print(chromosome_infix(result.best, config.functions, train.terminals))

# %% Same seed, same answer.
again = evolve(config, train)
print("repeatable:", again.best == result.best)
