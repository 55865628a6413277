# Scheduling loop and placement policies
