# Experiment harness module
