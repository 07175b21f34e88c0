"""The 2-3-1 backprop network used as a comparison baseline.

Run: python3 demos/ann_baseline.py
"""

# %%
from gepucs import metrics, split, table1
from gepucs.reference import TrainParams, ann_forward, ann_gradient_check, ann_init, ann_train

train, test = split(table1(), 2 / 3, 2015)
net = ann_init(2015)

# %% Analytic gradients agree with central differences.
print("max relative gradient gap", ann_gradient_check(net, (0.4, 0.6), 0.5))

# %%
trained, history = ann_train(net, train, TrainParams(learning_rate=0.3, momentum=0.2,
                                                    epochs=500, seed=2015))
for epoch in (0, 9, 99, 499):
    print(f"epoch {epoch + 1:3d}  mse {history[epoch]:.5f}")

# %%
pred = [ann_forward(trained, s) for s in test]
print(metrics.MetricsReport.compute(test.target(), pred).to_json())
