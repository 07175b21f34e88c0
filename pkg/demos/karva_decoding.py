"""How a linear K-expression turns into an expression tree.

Run: python3 demos/karva_decoding.py
"""

# %%
from gepucs.karva import FunctionSet, Gene, decode, evaluate_tree, tail_length, to_infix

fs = FunctionSet.of(("+", "*", "s"))
h = 4
t = tail_length(h, fs.max_arity)
print(f"head {h}, max arity {fs.max_arity} -> tail {t}")

# %% Slots are filled level by level.  Everything after the last
# consumed symbol is carried along but never expressed.
gene = Gene(("*", "s", "+", "x", "y", "x", "y", "x", "y"), h, t)
tree = decode(gene, fs, ("x", "y"))
print("".join(gene.symbols), "->", to_infix(tree), f"({tree.size()} coding symbols)")

# %% A point mutation in the head can change the shape entirely.
mutated = Gene(("+",) + gene.symbols[1:], h, t)
print("".join(mutated.symbols), "->", to_infix(decode(mutated, fs, ("x", "y"))))

# %% Trees evaluate over numpy arrays; no protection on division or logs.
import numpy as np

print(evaluate_tree(tree, {"x": np.array([0.0, 1.0, 2.0]), "y": np.array([1.0, 1.0, 1.0])}))

# %% Numeric constants: '?' reads its value through the Dc domain.
const = Gene(("+", "?", "x", "x", "x"), 2, 3, dc=(1, 0, 0), constants=(0.5, 2.5))
print(to_infix(decode(const, FunctionSet.of(), ("x",))))
