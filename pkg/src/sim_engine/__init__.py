# Discrete-event simulation of the testbed
