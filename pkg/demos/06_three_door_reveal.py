"""The three-door game as a likelihood problem, no prior required.

You pick a door; the host must open one of the other two doors without
revealing the car, using a fair randomizer when both qualify.  He opens the
left one.  The same counting logic used for randomized experiments applies:
how many of the host's equally likely reveal policies produce what you saw,
under each possible car placement?

If both unchosen doors are empty, only the prefer-left policy opens the left
door, so the likelihood is 1/2.  If the car is behind the right unchosen
door, both policies are forced to open the left door, and the likelihood is
1.  Maximizing the likelihood says the car is behind the other door: switch.
"""
from defiers import monty_hall_likelihoods

result = monty_hall_likelihoods()
print("observed: host opened the left unchosen door, no car behind it\n")
print(f"likelihood if neither unchosen door hides the car: {result.car_absent}")
print(f"likelihood if the right unchosen door hides the car: {result.car_present}")
print(f"\ndecision: {result.decision}")
