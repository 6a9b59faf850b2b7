# CPM Telemetry Detection Workbench
