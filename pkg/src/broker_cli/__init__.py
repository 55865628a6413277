# Scenario files, plan loading, experiment farming and the command line.
