system = 'FirstOrderDecay'
scenarios = [
    dict(amplitude=0.2),
    dict(amplitude=0.4),
    dict(amplitude=0.3, x0=0.5),
    dict(amplitude=0.5, x0=0.5),
]
training = dict(max_epochs=500)
noise_sd = 0.01
out_dir = 'runs/decay'
