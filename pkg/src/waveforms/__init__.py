# Waveform synthesis module
