"""Quickstart: simulate, fit, predict and explain in about a minute.

Walks the whole surface once on a small sample: draw records from the
synthetic benchmark process, fit the two-part neural model, read off the
fitted distribution scalars, predict a few policies and attribute one
prediction to its inputs.
"""

import numpy as np

import freqsev as fs

# --- draw a modest sample from the benchmark process ----------------------
data = fs.generate_synthetic(8_000, seed=42)
print(f"records: {len(data)}, share with claims: {np.mean(data.n > 0):.2f}")

# --- fit: claim-count part then severity part ------------------------------
freq_cfg = fs.TrainConfig(hidden_dims=(16, 16), epochs=20, batch_size=256,
                          learning_rate=0.01, seed=1)
sev_cfg = fs.TrainConfig(hidden_dims=(16, 16), epochs=20, batch_size=256,
                         learning_rate=0.02, seed=2)
model = fs.fit_model(data, freq_cfg, sev_cfg)
print(f"zero inflation: {model.pi:.3f}   (generator used 0.2)")
print(f"count effect:   {model.gamma:.3f}   (generator used 0.5)")
print(f"dispersion:     {model.phi:.3f}   (generator used 1.0)")

# --- predict three policies ------------------------------------------------
x = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])
preds = fs.predict(model, x, t=1.0)
for row, lam, mean, var in zip(x, preds.lam, preds.agg_mean, preds.agg_var):
    print(f"x={row}: expected claims {lam:.2f}, "
          f"expected total loss {mean:.2f} (sd {np.sqrt(var):.2f})")

# --- explain the riskiest one ----------------------------------------------
value_fn = lambda z: np.exp(np.atleast_1d(model.log_frequency(z)))
background = data.x[np.random.default_rng(0).choice(len(data), 100, replace=False)]
att = fs.shapley_exact(value_fn, x[2], background)
print(f"\nclaim-rate attribution at x={x[2]}:")
print(f"  base value {att.base_value:.3f}")
for name, phi in zip(("x1", "x2"), att.values):
    print(f"  {name}: {phi:+.3f}")
print(f"  -> model output {att.model_output:.3f}")
