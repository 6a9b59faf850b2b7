# Sequence detectors module
