from attendeeManager import AttendeeManager

attendeeManager = AttendeeManager()
attendeeManager.add_attendee("john@gmail.com", "John Doe")
